//! Command implementations behind the `gamma-models` binary.
//!
//! Every command takes parsed documents and a [`RunConfig`] and returns a
//! serializable result together with a pass flag; the binary only handles
//! argument parsing, files and exit codes.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::fundops::{solve_fundamental_sylvester, solve_fundamental_with, FundamentalSystem, SolveOptions, Which};
use crate::gammaclass::{classify, CertParams, ClassLabel, GammaCertificate, Structure};
use crate::hardy::{canonical_gamma_unitary, wold, CanonicalUnitary, WoldDecomposition};
use crate::io::TupleDocument;
use crate::models::{
    douglas_model, factorize_with, nagy_foias_model, schaffer_model, verify_model_with, DilateOptions,
    DilationModel, FactorizeOptions, Factorization, VerifyOptions, VerifyReport,
};
use crate::opcore::{max_abs, OperatorTuple};
use crate::recipes;
use crate::{Error, Mat, Result, C64};

/// Shared numerical settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tol: f64,
    pub degree: usize,
    pub grid: usize,
    /// Polynomial degree for certification; `2n` when unset.
    pub poly_degree: Option<usize>,
    pub trials: usize,
    pub density: usize,
    pub words: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: 1e-8,
            degree: 16,
            grid: 64,
            poly_degree: None,
            trials: 200,
            density: 48,
            words: 6,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.degree == 0 || self.grid == 0 || self.trials == 0 || self.density == 0 {
            return Err(Error::InvalidParameter(
                "degree, grid, trials and density must be positive".into(),
            ));
        }
        if self.poly_degree == Some(0) {
            return Err(Error::InvalidParameter("polynomial degree must be positive".into()));
        }
        crate::hardy::check_grid(self.grid, self.degree)
    }

    pub fn cert_params(&self, n: usize) -> CertParams {
        let mut p = CertParams::for_arity(n);
        p.degree = self.poly_degree.unwrap_or(2 * n);
        p.trials = self.trials;
        p.density = self.density;
        p.tol = self.tol;
        p.seed = self.seed;
        p
    }

    pub fn dilate_options(&self) -> DilateOptions {
        DilateOptions {
            tol: self.tol,
            degree: self.degree,
            grid: self.grid,
            words: Some(self.words),
            tail_budget: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    Scalar,
    Diagonal,
    Pencil,
    DirectSum,
    RandomCommuting,
    Compression,
    GammaUnitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PencilFamily {
    /// Unitary-orbit family `Eᵢ = W e_i(ū) W*`, any arity.
    Torus,
    /// Non-normal `E` with `ω(E) ≤ 1`, arity 2.
    Radius,
}

/// Parameters of [`cmd_gen`]; unused fields are ignored by a recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n: usize,
    pub dim: usize,
    /// Point of the polydisc for `scalar`.
    pub z: Option<Vec<C64>>,
    pub radius: f64,
    pub degree: usize,
    pub coeff_dim: usize,
    pub family: PencilFamily,
    /// Numerical radius for the `radius` family.
    pub scale: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n: 2,
            dim: 2,
            z: None,
            radius: 0.8,
            degree: 4,
            coeff_dim: 1,
            family: PencilFamily::Torus,
            scale: 0.9,
        }
    }
}

fn pencil_coeffs(p: &GenParams, rng: &mut ChaCha8Rng) -> Result<Vec<Mat>> {
    match p.family {
        PencilFamily::Torus => recipes::torus_pencil(p.n, p.coeff_dim, rng),
        PencilFamily::Radius => {
            if p.n != 2 {
                return Err(Error::InvalidParameter("the radius family has arity 2".into()));
            }
            recipes::radius_pencil(p.coeff_dim, p.scale, rng)
        }
    }
}

/// Builds a tuple document; deterministic for a fixed seed.
pub fn cmd_gen(recipe: Recipe, p: &GenParams, seed: u64) -> Result<TupleDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-10;
    let t = match recipe {
        Recipe::Scalar => {
            let z = p
                .z
                .clone()
                .unwrap_or_else(|| crate::symdomain::random_disc_point(p.n, p.radius, &mut rng));
            recipes::scalar(&z)?
        }
        Recipe::Diagonal => recipes::random_diagonal(p.n, p.dim, p.radius, &mut rng)?,
        Recipe::Pencil => recipes::pencil_isometry(&pencil_coeffs(p, &mut rng)?, p.degree, None, tol)?,
        Recipe::DirectSum => {
            let e = pencil_coeffs(p, &mut rng)?;
            let u = recipes::gamma_unitary(p.n, p.dim, &mut rng)?;
            recipes::pencil_isometry(&e, p.degree, Some(&u), tol)?
        }
        Recipe::RandomCommuting => recipes::random_commuting(p.n, p.dim, p.radius, &mut rng)?,
        Recipe::Compression => {
            let e = pencil_coeffs(p, &mut rng)?;
            let nodes = recipes::separated_nodes(p.dim, p.radius, 0.1, &mut rng);
            recipes::coinvariant_compression(&e, &nodes)?
        }
        Recipe::GammaUnitary => recipes::gamma_unitary(p.n, p.dim, &mut rng)?,
    };
    let mut doc = TupleDocument::from_tuple(&t).with_metadata(serde_json::json!({
        "seed": seed,
        "recipe": recipe,
        "params": p,
    }));
    if matches!(recipe, Recipe::Pencil | Recipe::DirectSum) {
        let r = p.coeff_dim;
        let mut interior: Vec<usize> = (0..r * p.degree).collect();
        interior.extend(r * (p.degree + 1)..t.dim());
        doc.interior = Some(interior);
    }
    Ok(doc)
}

/// A tuple read from either a tuple document or a dilation model.
#[derive(Debug, Clone)]
pub struct LoadedTuple {
    pub tuple: OperatorTuple,
    pub interior: Option<Vec<usize>>,
}

pub fn load_tuple(json: &str) -> Result<LoadedTuple> {
    let v: Value = serde_json::from_str(json)?;
    if v.get("model_tuple").is_some() {
        let m: DilationModel = serde_json::from_value(v)?;
        return Ok(LoadedTuple {
            tuple: m.model_tuple,
            interior: Some(m.interior),
        });
    }
    let doc: TupleDocument = serde_json::from_value(v)?;
    Ok(LoadedTuple {
        tuple: doc.to_tuple()?,
        interior: doc.interior,
    })
}

/// Finest Γₙ-class label; truncated structure is used when the input carries an interior.
pub fn cmd_certify(input: &LoadedTuple, cfg: &RunConfig) -> Result<GammaCertificate> {
    cfg.validate()?;
    let structure = match &input.interior {
        Some(interior) => Structure::Truncated {
            interior: interior.clone(),
        },
        None => Structure::Plain,
    };
    classify(&input.tuple, &cfg.cert_params(input.tuple.arity()), &structure)
}

pub fn certificate_passed(c: &GammaCertificate) -> bool {
    c.label != ClassLabel::Refuted
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalOutput {
    pub system: FundamentalSystem,
    /// Largest entrywise difference between the pseudo-inverse and least-squares solutions.
    pub path_agreement: f64,
    pub budgets: BTreeMap<String, f64>,
    pub passed: bool,
}

pub fn cmd_fundamental(t: &OperatorTuple, which: Which, cfg: &RunConfig) -> Result<FundamentalOutput> {
    cfg.validate()?;
    let tol = cfg.tol;
    let mut opts = SolveOptions::new(tol);
    opts.require_residual = false;
    let system = solve_fundamental_with(t, which, &opts)?;
    let other = solve_fundamental_sylvester(t, which, tol)?;
    let path_agreement = system
        .ops
        .iter()
        .zip(&other)
        .map(|(a, b)| max_abs(&(a - b)))
        .fold(0.0, f64::max);
    let scale = t.max_norm().max(1.0);
    let mut budgets = BTreeMap::new();
    budgets.insert("residual_16".to_string(), tol * scale);
    budgets.insert("residual_17".to_string(), 10.0 * tol * scale);
    budgets.insert("path_agreement".to_string(), tol);
    budgets.insert("radius_margin".to_string(), -tol);
    let passed = system.residual_16 <= budgets["residual_16"]
        && system.residual_17 <= budgets["residual_17"]
        && path_agreement <= budgets["path_agreement"]
        && system.radius_margin >= budgets["radius_margin"];
    Ok(FundamentalOutput {
        system,
        path_agreement,
        budgets,
        passed,
    })
}

pub fn cmd_wold(t: &OperatorTuple, cfg: &RunConfig) -> Result<WoldDecomposition> {
    cfg.validate()?;
    wold(t, cfg.tol)
}

pub fn wold_passed(w: &WoldDecomposition, t: &OperatorTuple, tol: f64) -> bool {
    w.max_residual() <= tol * t.max_norm().max(1.0)
}

pub fn cmd_canonical(t: &OperatorTuple, max_iter: Option<usize>, cfg: &RunConfig) -> Result<CanonicalUnitary> {
    cfg.validate()?;
    canonical_gamma_unitary(t, cfg.tol.min(1e-12), max_iter)
}

pub fn canonical_passed(c: &CanonicalUnitary, tol: f64) -> bool {
    c.monotonicity_violation <= 1e-9
        && c.psd_violation <= 1e-9
        && c.residuals.iter().all(|(k, v)| k == "last_step" || *v <= tol.max(1e-8))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Douglas,
    Nf,
    Schaffer,
}

pub fn cmd_dilate(t: &OperatorTuple, kind: ModelChoice, cfg: &RunConfig) -> Result<DilationModel> {
    cfg.validate()?;
    let opts = cfg.dilate_options();
    let mut sopts = SolveOptions::new(cfg.tol);
    sopts.outer_angles = 90;
    sopts.inner_angles = 90;
    match kind {
        ModelChoice::Douglas => douglas_model(t, &solve_fundamental_with(t, Which::Adjoint, &sopts)?, &opts),
        ModelChoice::Nf => nagy_foias_model(t, &solve_fundamental_with(t, Which::Adjoint, &sopts)?, &opts),
        ModelChoice::Schaffer => schaffer_model(t, &solve_fundamental_with(t, Which::Forward, &sopts)?, &opts),
    }
}

pub fn cmd_factorize(
    general: &DilationModel,
    minimal: &DilationModel,
    horizon: Option<usize>,
    cfg: &RunConfig,
) -> Result<Factorization> {
    factorize_with(general, minimal, &FactorizeOptions { tol: cfg.tol, horizon })
}

pub fn cmd_verify(model: &DilationModel, t: &OperatorTuple, classify_model: bool, cfg: &RunConfig) -> Result<VerifyReport> {
    let classify = classify_model.then(|| cfg.cert_params(t.arity()));
    verify_model_with(
        model,
        t,
        &VerifyOptions {
            word_len: cfg.words,
            tol: cfg.tol,
            classify,
        },
    )
}

/// One line of a rendered report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub path: String,
    pub residual: f64,
    pub budget: Option<f64>,
    pub ok: bool,
}

/// Collects every `residuals`/`budgets` pair (and `passed`/`label` flags) found in a JSON output.
pub fn cmd_report(json: &str) -> Result<(Vec<ReportLine>, bool)> {
    let v: Value = serde_json::from_str(json)?;
    let mut lines = Vec::new();
    let mut ok = true;
    walk(&v, String::new(), &mut lines, &mut ok);
    Ok((lines, ok))
}

fn walk(v: &Value, path: String, lines: &mut Vec<ReportLine>, ok: &mut bool) {
    let Value::Object(map) = v else { return };
    if let Some(Value::Object(res)) = map.get("residuals") {
        let budgets = map.get("budgets").and_then(|b| b.as_object());
        for (k, r) in res {
            let residual = r.as_f64().unwrap_or(f64::NAN);
            let budget = budgets.and_then(|b| b.get(k)).and_then(|b| b.as_f64());
            let line_ok = budget.map_or(true, |b| residual <= b);
            *ok &= line_ok;
            lines.push(ReportLine {
                path: format!("{path}{k}"),
                residual,
                budget,
                ok: line_ok,
            });
        }
    }
    if let Some(Value::Bool(p)) = map.get("passed") {
        *ok &= *p;
    }
    if map.get("label").and_then(|l| l.as_str()) == Some("refuted") {
        *ok = false;
    }
    for (k, child) in map {
        if k != "residuals" && k != "budgets" {
            walk(child, format!("{path}{k}."), lines, ok);
        }
    }
}
