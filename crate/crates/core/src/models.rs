//! Douglas, Sz.-Nagy-Foias and Schäffer dilation models, the factorization
//! maps between dilations, and word-level verification.
//!
//! Every model is an isometric embedding `ℰ: 𝓗 → 𝒦` together with a tuple
//! `V` on `𝒦` such that `ℰSᵢ* = Vᵢ*ℰ`. Hardy blocks are truncated at degree
//! `N`; identities that cross the top degree carry a truncation budget.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fundops::{commutativity_of, pencil_from_ops, FundamentalSystem, Which};
use crate::gammaclass::{block_diag, classify, CertParams, GammaCertificate, Structure};
use crate::hardy::{canonical_gamma_unitary, check_grid, grid_nodes, mphi, mz, TruncatedHardySpace};
use crate::opcore::{defect, gemm, gemm_adj, op_norm, op_norm_bound, orth_basis, svd, OperatorTuple, Side};
use crate::{Error, Mat, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Douglas,
    NagyFoias,
    Schaffer,
}

/// One summand of a model space, in the order the coordinates appear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "block", rename_all = "snake_case")]
pub enum SpaceBlock {
    Ambient { dim: usize },
    Hardy { coeff_dim: usize, degree: usize },
    /// Δ-weighted samples; `rank` is the total rank of the weights.
    TorusGrid { coeff_dim: usize, grid_size: usize, rank: usize },
    CanonicalUnitary { dim: usize },
    Padding { dim: usize },
}

/// Residuals together with the budget each one is held to.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub residuals: BTreeMap<String, f64>,
    pub budgets: BTreeMap<String, f64>,
}

impl ModelReport {
    fn put(&mut self, key: &str, value: f64, budget: f64) {
        self.residuals.insert(key.to_string(), value);
        self.budgets.insert(key.to_string(), budget);
    }

    /// Keys whose residual exceeds the budget (NaN counts as a violation).
    pub fn violations(&self) -> Vec<String> {
        self.budgets
            .iter()
            .filter(|(k, b)| {
                let r = self.residuals.get(*k).copied().unwrap_or(f64::NAN);
                !(r <= **b)
            })
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.residuals.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationModel {
    pub kind: ModelKind,
    #[serde(with = "crate::io::tuple")]
    pub model_tuple: OperatorTuple,
    /// `ℰ`, a `dim 𝒦 × dim 𝓗` matrix.
    #[serde(with = "crate::io::mat")]
    pub embed: Mat,
    pub space: Vec<SpaceBlock>,
    pub degree: usize,
    /// Bound on the mass the truncation drops (zero when the construction is exact).
    pub truncation_bound: f64,
    /// Coordinates on which `Vₙ` is exactly isometric and the tuple exactly commutes.
    pub interior: Vec<usize>,
    pub report: ModelReport,
}

impl DilationModel {
    pub fn model_dim(&self) -> usize {
        self.embed.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.embed.ncols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilateOptions {
    pub tol: f64,
    pub degree: usize,
    pub grid: usize,
    /// Word length for the compression checks; `min(N, 6)` when unset.
    pub words: Option<usize>,
    /// Largest truncation tail accepted; `√tol` when unset.
    pub tail_budget: Option<f64>,
}

impl DilateOptions {
    pub fn new(tol: f64) -> Self {
        DilateOptions {
            tol,
            degree: 16,
            grid: 64,
            words: None,
            tail_budget: None,
        }
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }

    pub fn word_len(&self) -> usize {
        self.words.unwrap_or(self.degree.min(6))
    }

    pub fn tail_budget(&self) -> f64 {
        self.tail_budget.unwrap_or(self.tol.sqrt())
    }
}

/// Smallest `N` with `norm^{N+1} ≤ target`.
pub fn degree_for_tail(norm: f64, target: f64) -> usize {
    if norm <= 0.0 {
        return 0;
    }
    if norm >= 1.0 {
        return usize::MAX;
    }
    let k = (target.ln() / norm.ln()).ceil().max(1.0) as usize;
    k - 1
}

fn hardy_embedding(coords: &Mat, sn_adj: &Mat, degree: usize) -> Mat {
    let r = coords.nrows();
    let d = coords.ncols();
    let mut out = Mat::zeros(r * (degree + 1), d);
    let mut power = Mat::identity(d, d);
    for k in 0..=degree {
        out.view_mut((k * r, 0), (r, d)).copy_from(&(coords * &power));
        power = &power * sn_adj;
    }
    out
}

fn stack(top: &Mat, bottom: &Mat) -> Mat {
    let mut m = Mat::zeros(top.nrows() + bottom.nrows(), top.ncols());
    m.view_mut((0, 0), top.shape()).copy_from(top);
    m.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    m
}

/// `‖Sₙ^{N+1}Sₙ*^{N+1} − 𝒫²‖^{1/2}`, which bounds every truncated tail `‖D_{Sₙ*}Sₙ*^{k}h‖`, `k > N`.
fn douglas_tail(sn: &Mat, p: &Mat, degree: usize) -> f64 {
    let d = sn.nrows();
    let mut power = Mat::identity(d, d);
    for _ in 0..=degree {
        power = &power * sn;
    }
    op_norm(&(&power * power.adjoint() - p * p)).sqrt()
}

fn check_system(t: &OperatorTuple, f: &FundamentalSystem, which: Which) -> Result<()> {
    if f.which != which {
        return Err(Error::InvalidParameter(format!(
            "expected the {which:?} fundamental system"
        )));
    }
    if f.arity != t.arity() {
        return Err(Error::ArityMismatch {
            left: t.arity(),
            right: f.arity,
        });
    }
    if f.basis.nrows() != t.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fundamental system lives on dimension {}, tuple has {}",
            f.basis.nrows(),
            t.dim()
        )));
    }
    Ok(())
}

/// Douglas-type model: `ℰ_D h = Σ zᵏ D_{Sₙ*}Sₙ*ᵏh ⊕ 𝒫h` with `V̂ᵢ = M_{Φᵢ} ⊕ Dᵢ`.
pub fn douglas_model(
    t: &OperatorTuple,
    e: &FundamentalSystem,
    opts: &DilateOptions,
) -> Result<DilationModel> {
    check_system(t, e, Which::Adjoint)?;
    let tol = opts.tol;
    let sn = t.last();
    let cu = canonical_gamma_unitary(t, 1e-12, None)?;
    let tail = douglas_tail(sn, &cu.p_op, opts.degree);
    if tail > opts.tail_budget() {
        return Err(Error::TruncationInsufficient {
            tail,
            budget: opts.tail_budget(),
        });
    }
    let space = TruncatedHardySpace::new(e.rank(), opts.degree);
    let pencil = pencil_from_ops(&e.ops, &space, tol)?;
    let hardy = hardy_embedding(&e.defect_coords(), &sn.adjoint(), opts.degree);
    let canon = cu.basis.adjoint() * &cu.p_op;
    let embed = stack(&hardy, &canon);
    let ops: Vec<Mat> = pencil
        .ops()
        .iter()
        .zip(cu.tuple.ops())
        .map(|(m, dd)| block_diag(m, dd))
        .collect();
    let hd = space.total_dim();
    let interior: Vec<usize> = (0..e.rank() * opts.degree).chain(hd..hd + cu.rank()).collect();
    let mut model = DilationModel {
        kind: ModelKind::Douglas,
        model_tuple: OperatorTuple::new(ops)?,
        embed,
        space: vec![
            SpaceBlock::Hardy {
                coeff_dim: e.rank(),
                degree: opts.degree,
            },
            SpaceBlock::CanonicalUnitary { dim: cu.rank() },
        ],
        degree: opts.degree,
        truncation_bound: tail,
        interior,
        report: ModelReport::default(),
    };
    let mut report = model_checks(&model, t, opts.word_len(), tol);
    report.put("tail", tail, opts.tail_budget());
    report.put(
        "commutativity_condition",
        commutativity_of(&e.ops, tol).worst,
        tol * t.max_norm().max(1.0),
    );
    report.put("canonical_quotient", cu.residuals["quotient"], 1e-6);
    model.report = report;
    Ok(model)
}

/// Characteristic function `Θ(z) = −T + z D_{T*}(I − zT*)⁻¹ D_T`, written as an
/// `r_{T*} × r_T` matrix (rows in `𝒟_{T*}` coordinates, columns in `𝒟_T` coordinates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicFunction {
    #[serde(rename = "t", with = "crate::io::mat")]
    pub op: Mat,
    /// Orthonormal basis of `𝒟_T`.
    #[serde(with = "crate::io::mat")]
    pub defect_basis: Mat,
    /// Orthonormal basis of `𝒟_{T*}`.
    #[serde(with = "crate::io::mat")]
    pub co_defect_basis: Mat,
    #[serde(with = "crate::io::mat")]
    defect_coords: Mat,
    #[serde(with = "crate::io::mat")]
    co_defect_coords: Mat,
    pub tol: f64,
}

pub fn characteristic_function(tn: &Mat, tol: f64) -> Result<CharacteristicFunction> {
    let dd = defect(tn, Side::Right, tol)?;
    let ds = defect(tn, Side::Left, tol)?;
    Ok(CharacteristicFunction {
        op: tn.clone(),
        defect_coords: dd.coords(),
        co_defect_coords: ds.coords(),
        defect_basis: dd.range_basis,
        co_defect_basis: ds.range_basis,
        tol,
    })
}

impl CharacteristicFunction {
    pub fn rows(&self) -> usize {
        self.co_defect_basis.ncols()
    }

    pub fn cols(&self) -> usize {
        self.defect_basis.ncols()
    }

    pub fn eval(&self, z: C64) -> Result<Mat> {
        if !(z.norm() <= 1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "characteristic function evaluated outside the closed disc at {z}"
            )));
        }
        let d = self.op.nrows();
        let head = -(self.co_defect_basis.adjoint() * &self.op * &self.defect_basis);
        if d == 0 || self.rows() == 0 || self.cols() == 0 {
            return Ok(head);
        }
        let res = Mat::identity(d, d) - self.op.adjoint().map(|w| w * z);
        let sv = res.singular_values();
        if sv.min() <= 1e-12 * sv.max().max(1.0) {
            return Err(Error::EvaluationSingular { z });
        }
        let rhs = self.defect_coords.adjoint();
        let solved = res
            .lu()
            .solve(&rhs)
            .ok_or(Error::EvaluationSingular { z })?;
        Ok(head + (&self.co_defect_coords * solved).map(|w| w * z))
    }

    /// `Δ(η) = (I − Θ(η)*Θ(η))^{1/2}`.
    pub fn delta(&self, eta: C64) -> Result<Mat> {
        let theta = self.eval(eta)?;
        Ok(defect(&theta, Side::Right, self.tol)?.d)
    }

    /// Taylor coefficient `Θ_k`.
    pub fn taylor(&self, k: usize) -> Mat {
        if k == 0 {
            return -(self.co_defect_basis.adjoint() * &self.op * &self.defect_basis);
        }
        let mut acc = self.defect_coords.adjoint();
        let adj = self.op.adjoint();
        for _ in 1..k {
            acc = &adj * acc;
        }
        &self.co_defect_coords * acc
    }

    /// Worst `‖Θ(η)‖ − 1`, worst `‖Δ² + Θ*Θ − I‖` and largest `‖Δ‖` over the `m` roots of unity.
    pub fn boundary_report(&self, m: usize) -> Result<BTreeMap<String, f64>> {
        let mut excess = f64::NEG_INFINITY;
        let mut identity: f64 = 0.0;
        let mut delta_max: f64 = 0.0;
        let mut unimodular: f64 = 0.0;
        let r = self.cols();
        for eta in grid_nodes(m) {
            let th = self.eval(eta)?;
            let dl = self.delta(eta)?;
            let norm = op_norm(&th);
            excess = excess.max(norm - 1.0);
            identity = identity.max(op_norm(
                &(&dl * &dl + th.adjoint() * &th - Mat::identity(r, r)),
            ));
            delta_max = delta_max.max(op_norm(&dl));
            if th.nrows() == 1 && th.ncols() == 1 {
                unimodular = unimodular.max((th[(0, 0)].norm() - 1.0).abs());
            }
        }
        let mut out = BTreeMap::new();
        out.insert("norm_excess".to_string(), excess.max(0.0));
        out.insert("delta_identity".to_string(), identity);
        out.insert("delta_max".to_string(), delta_max);
        out.insert("unimodularity".to_string(), unimodular);
        Ok(out)
    }
}

/// Sz.-Nagy-Foias model on `H²(𝒟_{Sₙ*}) ⊖ Θ·H²(𝒟_{Sₙ})` for operationally c.n.u. `Sₙ`.
///
/// With `𝒫 = 0` the characteristic function is inner, every `Δ(ηₖ)` vanishes
/// and the Δ-weighted torus block has rank zero, so the model lives on the
/// Hardy block alone.
pub fn nagy_foias_model(
    t: &OperatorTuple,
    e: &FundamentalSystem,
    opts: &DilateOptions,
) -> Result<DilationModel> {
    check_system(t, e, Which::Adjoint)?;
    check_grid(opts.grid, opts.degree)?;
    let tol = opts.tol;
    let sn = t.last();
    let cu = canonical_gamma_unitary(t, 1e-12, None)?;
    if cu.rank() > 0 {
        return Err(Error::NotCnu(cu.rank()));
    }
    let theta = characteristic_function(sn, tol)?;
    let boundary = theta.boundary_report(opts.grid)?;
    let weight_rank = grid_nodes(opts.grid)
        .into_iter()
        .map(|eta| theta.delta(eta).map(|dl| orth_basis(&dl, tol.sqrt()).ncols()))
        .sum::<Result<usize>>()?;
    if weight_rank > 0 {
        return Err(Error::NotCnu(weight_rank));
    }
    let mut model = douglas_model(t, e, opts)?;
    model.kind = ModelKind::NagyFoias;
    model.space = vec![
        SpaceBlock::Hardy {
            coeff_dim: e.rank(),
            degree: opts.degree,
        },
        SpaceBlock::TorusGrid {
            coeff_dim: theta.cols(),
            grid_size: opts.grid,
            rank: weight_rank,
        },
    ];
    // Θ in the Hardy coordinates of E: both bases span Ran D_{Sₙ*}.
    let change = e.basis.adjoint() * &theta.co_defect_basis;
    let n_deg = opts.degree;
    let (rs, r) = (e.rank(), theta.cols());
    let mut toeplitz = Mat::zeros(rs * (n_deg + 1), r * (n_deg + 1));
    for k in 0..=n_deg {
        let blk = &change * theta.taylor(k);
        for j in 0..=n_deg - k {
            toeplitz
                .view_mut(((j + k) * rs, j * r), (rs, r))
                .copy_from(&blk);
        }
    }
    let hardy = model.embed.rows(0, rs * (n_deg + 1)).into_owned();
    let orth = op_norm(&(hardy.adjoint() * toeplitz));
    let bound = model.truncation_bound;
    model.report.put(
        "orthogonality",
        orth,
        tol * 10.0 + bound * ((n_deg + 1) as f64).sqrt(),
    );
    model.report.put("delta_max", boundary["delta_max"], tol.sqrt());
    model
        .report
        .put("theta_norm_excess", boundary["norm_excess"], tol);
    model
        .report
        .put("delta_identity", boundary["delta_identity"], tol * 10.0);
    Ok(model)
}

/// Schäffer-type model on `𝓗 ⊕ H²(𝒟_{Sₙ})` with `Ψᵢ(z) = Fᵢ + zF*_{n−i}`.
pub fn schaffer_model(
    t: &OperatorTuple,
    f: &FundamentalSystem,
    opts: &DilateOptions,
) -> Result<DilationModel> {
    check_system(t, f, Which::Forward)?;
    let tol = opts.tol;
    let n = t.arity();
    let d = t.dim();
    let r = f.rank();
    let space = TruncatedHardySpace::new(r, opts.degree);
    let hd = space.total_dim();
    let dc = f.defect_coords();
    let mut ops = Vec::with_capacity(n);
    for i in 1..=n {
        let (col, sym) = if i == n {
            (dc.clone(), mz(&space))
        } else {
            let fi = f.op(i);
            let fc = f.op(n - i).adjoint();
            (&fc * &dc, mphi(&space, fi, &fc)?)
        };
        let mut v = Mat::zeros(d + hd, d + hd);
        v.view_mut((0, 0), (d, d)).copy_from(t.op(i));
        if r > 0 {
            v.view_mut((d, 0), (r, d)).copy_from(&col);
        }
        v.view_mut((d, d), (hd, hd)).copy_from(&sym);
        ops.push(v);
    }
    let mut embed = Mat::zeros(d + hd, d);
    embed.view_mut((0, 0), (d, d)).fill_with_identity();
    let model_tuple = OperatorTuple::new(ops)?;
    let interior: Vec<usize> = (0..d + r * opts.degree).collect();
    let mut model = DilationModel {
        kind: ModelKind::Schaffer,
        model_tuple,
        embed,
        space: vec![
            SpaceBlock::Ambient { dim: d },
            SpaceBlock::Hardy {
                coeff_dim: r,
                degree: opts.degree,
            },
        ],
        degree: opts.degree,
        truncation_bound: 0.0,
        interior,
        report: ModelReport::default(),
    };
    let mut report = model_checks(&model, t, opts.word_len(), tol);
    report.put(
        "commutativity_condition",
        commutativity_of(&f.ops, tol).worst,
        tol * t.max_norm().max(1.0),
    );
    model.report = report;
    Ok(model)
}

/// Appends an uncoupled unitary summand: `V ⊕ U`, `ℰ ⊕ 0`.
pub fn pad_with_unitary(model: &DilationModel, u: &OperatorTuple, tol: f64) -> Result<DilationModel> {
    let m = model.model_tuple.arity();
    if u.arity() != m {
        return Err(Error::ArityMismatch {
            left: m,
            right: u.arity(),
        });
    }
    let un = u.last();
    let k = u.dim();
    let defect = op_norm(&(un.adjoint() * un - Mat::identity(k, k)));
    if defect > tol {
        return Err(Error::NotUnitary(defect));
    }
    let ops: Vec<Mat> = model
        .model_tuple
        .ops()
        .iter()
        .zip(u.ops())
        .map(|(a, b)| block_diag(a, b))
        .collect();
    let embed = stack(&model.embed, &Mat::zeros(k, model.input_dim()));
    let dim = model.model_dim();
    let mut space = model.space.clone();
    space.push(SpaceBlock::Padding { dim: k });
    let mut out = DilationModel {
        kind: model.kind,
        model_tuple: OperatorTuple::new(ops)?,
        embed,
        space,
        degree: model.degree,
        truncation_bound: model.truncation_bound,
        interior: model.interior.iter().cloned().chain(dim..dim + k).collect(),
        report: model.report.clone(),
    };
    let (gap, _) = minimality_gap(&out, model.degree + 1, tol);
    out.report.residuals.insert("minimality_gap".into(), gap);
    out.report.budgets.remove("minimality_gap");
    Ok(out)
}

/// Row-compressed sparse matrix for applying model operators to thin blocks.
struct Sparse {
    rows: Vec<Vec<(usize, C64)>>,
}

impl Sparse {
    fn from_dense(m: &Mat) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != C64::new(0.0, 0.0))
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Sparse { rows }
    }

    fn apply(&self, x: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows.len(), x.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            for c in 0..x.ncols() {
                let mut acc = C64::new(0.0, 0.0);
                for &(j, v) in row {
                    acc += v * x[(j, c)];
                }
                out[(i, c)] = acc;
            }
        }
        out
    }
}

/// Block Krylov span of `{Vₙᵏℰ : k ≤ horizon}`: returns `(gap, rank)` with gap 0 when it fills `𝒦`.
pub fn minimality_gap(model: &DilationModel, horizon: usize, tol: f64) -> (f64, usize) {
    let dim = model.model_dim();
    if dim == 0 {
        return (0.0, 0);
    }
    let vn = Sparse::from_dense(model.model_tuple.last());
    let cutoff = tol.sqrt();
    let mut basis = Mat::zeros(dim, 0);
    let mut block = model.embed.clone();
    for _ in 0..=horizon {
        for _ in 0..2 {
            let proj = gemm_adj(&basis, &block);
            block -= gemm(&basis, &proj);
        }
        let fresh = orth_basis(&block, cutoff);
        if fresh.ncols() == 0 {
            break;
        }
        let old = basis.ncols();
        basis = basis.insert_columns(old, fresh.ncols(), C64::new(0.0, 0.0));
        basis.view_mut((0, old), fresh.shape()).copy_from(&fresh);
        if basis.ncols() >= dim {
            break;
        }
        block = vn.apply(&fresh);
    }
    let rank = basis.ncols();
    let gap = if rank >= dim {
        0.0
    } else {
        op_norm(&(Mat::identity(dim, dim) - &basis * basis.adjoint()))
    };
    (gap, rank)
}

/// Report of [`verify_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub word_len: usize,
    /// `‖ℰ*w(V)ℰ − w(S)‖` keyed by the letters of `w` (`e` is the empty word).
    pub words: BTreeMap<String, f64>,
    pub report: ModelReport,
    pub worst: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<GammaCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub word_len: usize,
    pub tol: f64,
    /// Certify the model tuple as a Γₙ-isometry at truncation (expensive for large models).
    pub classify: Option<CertParams>,
}

pub fn verify_model(model: &DilationModel, t: &OperatorTuple, word_len: usize, tol: f64) -> Result<VerifyReport> {
    verify_model_with(
        model,
        t,
        &VerifyOptions {
            word_len,
            tol,
            classify: None,
        },
    )
}

pub fn verify_model_with(
    model: &DilationModel,
    t: &OperatorTuple,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    check_model_input(model, t)?;
    let (report, words) = verify_core(model, t, opts.word_len, opts.tol);
    let certificate = match &opts.classify {
        Some(params) => Some(classify(
            &model.model_tuple,
            params,
            &Structure::Truncated {
                interior: model.interior.clone(),
            },
        )?),
        None => None,
    };
    let worst = report.residuals.values().cloned().fold(0.0, f64::max);
    Ok(VerifyReport {
        word_len: opts.word_len,
        words,
        worst,
        passed: report.passed(),
        report,
        certificate,
    })
}

fn check_model_input(model: &DilationModel, t: &OperatorTuple) -> Result<()> {
    if model.model_tuple.arity() != t.arity() {
        return Err(Error::ArityMismatch {
            left: model.model_tuple.arity(),
            right: t.arity(),
        });
    }
    if model.input_dim() != t.dim() || model.model_tuple.dim() != model.model_dim() {
        return Err(Error::DimensionMismatch(format!(
            "model embeds dimension {} into {}, tuple has dimension {}",
            model.input_dim(),
            model.model_dim(),
            t.dim()
        )));
    }
    Ok(())
}

fn word_key(word: &[usize]) -> String {
    if word.is_empty() {
        "e".to_string()
    } else {
        word.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Embedding, intertwining and word-compression residuals with their budgets.
fn verify_core(
    model: &DilationModel,
    t: &OperatorTuple,
    word_len: usize,
    tol: f64,
) -> (ModelReport, BTreeMap<String, f64>) {
    let n = t.arity();
    let d = t.dim();
    let emb = &model.embed;
    let tail = model.truncation_bound;
    let vnorm = model.model_tuple.max_norm().max(1.0);
    let mut report = ModelReport::default();

    let iso = op_norm(&(emb.adjoint() * emb - Mat::identity(d, d)));
    report.put("embedding_isometry", iso, tol + tail);
    let mut eta: f64 = 0.0;
    for i in 1..=n {
        let v = model.model_tuple.op(i);
        let res = op_norm(&(emb * t.op(i).adjoint() - v.adjoint() * emb));
        eta = eta.max(res);
        report.put(
            &format!("intertwining_{i}"),
            res,
            tol * vnorm + (1.0 + vnorm) * tail,
        );
    }

    // Compression errors accumulate at most `ℓ·η·M^{ℓ−1} + M^ℓ·iso` along a word of length ℓ.
    let sparse: Vec<Sparse> = model.model_tuple.ops().iter().map(Sparse::from_dense).collect();
    let words: Vec<(Vec<usize>, f64)> = if word_len == 0 {
        vec![(Vec::new(), iso)]
    } else {
        let mut out = vec![(Vec::new(), iso)];
        let branches: Vec<Vec<(Vec<usize>, f64)>> = (1..=n)
            .into_par_iter()
            .map(|a| {
                let mut acc = Vec::new();
                let x = sparse[a - 1].apply(emb);
                let w = t.op(a).clone();
                word_dfs(&sparse, t, emb, vec![a], x, w, word_len, &mut acc);
                acc
            })
            .collect();
        for b in branches {
            out.extend(b);
        }
        out
    };
    // The word with the least slack carries the "compression" entry.
    let mut map = BTreeMap::new();
    let mut tight = (f64::INFINITY, 0.0, 0.0);
    let mut worst: f64 = 0.0;
    for (w, res) in &words {
        let l = w.len() as f64;
        let scale = vnorm.powf(l);
        let budget = tol * scale * (l + 1.0) + l * eta * vnorm.powf((l - 1.0).max(0.0)) + scale * iso;
        if budget - res < tight.0 || res.is_nan() {
            tight = (budget - res, *res, budget);
        }
        worst = worst.max(*res);
        map.insert(word_key(w), *res);
    }
    report.put("compression", tight.1, tight.2);
    report.residuals.insert("compression_worst".into(), worst);
    (report, map)
}

#[allow(clippy::too_many_arguments)]
fn word_dfs(
    sparse: &[Sparse],
    t: &OperatorTuple,
    emb: &Mat,
    word: Vec<usize>,
    x: Mat,
    w: Mat,
    max_len: usize,
    out: &mut Vec<(Vec<usize>, f64)>,
) {
    out.push((word.clone(), op_norm(&(emb.ad_mul(&x) - &w))));
    if word.len() == max_len {
        return;
    }
    for (a, s) in sparse.iter().enumerate() {
        let mut next = Vec::with_capacity(word.len() + 1);
        next.push(a + 1);
        next.extend_from_slice(&word);
        word_dfs(sparse, t, emb, next, s.apply(&x), t.op(a + 1) * &w, max_len, out);
    }
}

/// Construction-time checks shared by every model kind.
fn model_checks(model: &DilationModel, t: &OperatorTuple, word_len: usize, tol: f64) -> ModelReport {
    let (mut report, _) = verify_core(model, t, word_len, tol);
    let n = t.arity();
    let vt = &model.model_tuple;
    let dim = model.model_dim();
    let j = Mat::identity(dim, dim).select_columns(&model.interior);
    let vnorm = vt.max_norm().max(1.0);
    let budget = tol * vnorm * vnorm + 2.0 * vnorm * model.truncation_bound;
    // Model operators are banded; apply them sparsely and bound the residual norms.
    let ops: Vec<Sparse> = vt.ops().iter().map(Sparse::from_dense).collect();
    let vn_adj = Sparse::from_dense(&vt.last().adjoint());
    let vj: Vec<Mat> = ops.iter().map(|s| s.apply(&j)).collect();
    report.put("isometry_interior", op_norm_bound(&(vn_adj.apply(&vj[n - 1]) - &j)), budget);
    let mut pencil: f64 = 0.0;
    for i in 1..n {
        let adj = Sparse::from_dense(&vt.op(n - i).adjoint());
        pencil = pencil.max(op_norm_bound(&(&vj[i - 1] - adj.apply(&vj[n - 1]))));
    }
    report.put("pencil_identity_interior", pencil, budget);
    let mut comm: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            comm = comm.max(op_norm_bound(&(ops[a].apply(&vj[b]) - ops[b].apply(&vj[a]))));
        }
    }
    report.put("commutation_interior", comm, budget);
    let (gap, _) = minimality_gap(model, model.degree + 1, tol);
    report.put("minimality_gap", gap, tol.sqrt());
    report
}

/// The map Ξ between two dilations of the same tuple together with its checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    /// `Ξ: 𝒦_m → 𝒦` with `Ξ Vₘᵏℰₘ = Vᵏℰ` for `k ≤ horizon`.
    #[serde(with = "crate::io::mat")]
    pub xi: Mat,
    pub horizon: usize,
    /// Dimension of the generator span of the minimal model.
    pub rank: usize,
    /// `ΞΞ*`, the projection onto the range of Ξ.
    #[serde(with = "crate::io::mat")]
    pub range_projection: Mat,
    /// Ξ is an isometry onto the generator span of the general model.
    pub unitary: bool,
    /// The range of Ξ is all of `𝒦`.
    pub surjective: bool,
    pub report: ModelReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizeOptions {
    pub tol: f64,
    /// Largest power of `Vₙ` in the generators; the minimal model's degree + 1 when unset.
    pub horizon: Option<usize>,
}

impl FactorizeOptions {
    pub fn new(tol: f64) -> Self {
        FactorizeOptions { tol, horizon: None }
    }
}

pub fn factorize(general: &DilationModel, minimal: &DilationModel, tol: f64) -> Result<Factorization> {
    factorize_with(general, minimal, &FactorizeOptions::new(tol))
}

fn generators(model: &DilationModel, horizon: usize) -> Mat {
    let d = model.input_dim();
    let dim = model.model_dim();
    let vn = Sparse::from_dense(model.model_tuple.last());
    let mut g = Mat::zeros(dim, d * (horizon + 1));
    let mut blk = model.embed.clone();
    for k in 0..=horizon {
        g.view_mut((0, k * d), (dim, d)).copy_from(&blk);
        if k < horizon {
            blk = vn.apply(&blk);
        }
    }
    g
}

pub fn factorize_with(
    general: &DilationModel,
    minimal: &DilationModel,
    opts: &FactorizeOptions,
) -> Result<Factorization> {
    let tol = opts.tol;
    let n = minimal.model_tuple.arity();
    if general.model_tuple.arity() != n {
        return Err(Error::ArityMismatch {
            left: general.model_tuple.arity(),
            right: n,
        });
    }
    let d = minimal.input_dim();
    if general.input_dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "models embed dimensions {} and {}",
            general.input_dim(),
            d
        )));
    }
    // Both compress Vₙ to the same Sₙ.
    let sm = minimal.embed.adjoint() * minimal.model_tuple.last() * &minimal.embed;
    let sg = general.embed.adjoint() * general.model_tuple.last() * &general.embed;
    let mismatch = op_norm(&(&sm - &sg));
    let same_budget = tol.sqrt() + minimal.truncation_bound + general.truncation_bound;
    if mismatch > same_budget {
        return Err(Error::InvalidParameter(format!(
            "models dilate different operators (‖Δ Sₙ‖ = {mismatch:.3e})"
        )));
    }
    let horizon = opts.horizon.unwrap_or(minimal.degree + 1);
    let gm = generators(minimal, horizon);
    let g = generators(general, horizon);
    let dim_m = minimal.model_dim();
    let dim_g = general.model_dim();

    let dec = svd(&gm);
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let keep_cut = tol.sqrt() * smax;
    let drop_cut = tol * smax;
    let mut keep = Vec::new();
    for (k, s) in dec.s.iter().enumerate() {
        if *s > keep_cut {
            keep.push(k);
        } else if *s > drop_cut {
            return Err(Error::IllConditionedGram);
        }
    }
    let rank = keep.len();
    if rank < dim_m {
        let basis = dec.u.select_columns(&keep);
        let gap = op_norm(&(Mat::identity(dim_m, dim_m) - &basis * basis.adjoint()));
        return Err(Error::NotMinimal(gap));
    }
    let uk = dec.u.select_columns(&keep);
    let mut w = dec.v.select_columns(&keep);
    for (col, &k) in keep.iter().enumerate() {
        w.column_mut(col).scale_mut(1.0 / dec.s[k]);
    }
    // Ξ = G W Σ⁻¹ U*
    let xu = &g * w;
    let xi = &xu * uk.adjoint();

    let mut report = ModelReport::default();
    let budget = tol * 10.0 + 2.0 * (minimal.truncation_bound + general.truncation_bound);
    report.put(
        "isometry",
        op_norm(&(xu.adjoint() * &xu - Mat::identity(rank, rank))),
        budget,
    );
    report.put(
        "embedding",
        op_norm(&(&xi * &minimal.embed - &general.embed)),
        budget,
    );
    for i in 1..=n {
        let lhs = &xi * minimal.model_tuple.op(i).adjoint() * &uk;
        let rhs = general.model_tuple.op(i).adjoint() * &xu;
        report.put(&format!("intertwining_{i}"), op_norm(&(lhs - rhs)), budget);
    }
    let range_projection = &xi * xi.adjoint();
    let span = orth_basis(&g, tol.sqrt() * op_norm(&g).max(1e-300));
    let span_proj = &span * span.adjoint();
    let coiso = op_norm(&(&range_projection - &span_proj));
    report.put("coisometry_onto_span", coiso, budget);
    let surjective = span.ncols() == dim_g;
    report
        .residuals
        .insert("range_codimension".into(), (dim_g - span.ncols().min(dim_g)) as f64);
    let both_minimal = minimal.report.get("minimality_gap").map_or(true, |g| g <= tol.sqrt())
        && general.report.get("minimality_gap").map_or(true, |g| g <= tol.sqrt());
    let unitary = both_minimal && report.passed();
    Ok(Factorization {
        xi,
        horizon,
        rank,
        range_projection,
        unitary,
        surjective,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::fundops::solve_fundamental;

    fn scalar(s: &[C64]) -> OperatorTuple {
        OperatorTuple::new(s.iter().map(|z| Mat::from_element(1, 1, *z)).collect()).unwrap()
    }

    #[test]
    fn theta_examples() {
        let z0 = characteristic_function(&Mat::zeros(1, 1), 1e-10).unwrap();
        let z = c(0.3, -0.4);
        assert!((z0.eval(z).unwrap()[(0, 0)] - z).norm() < 1e-15);
        let th = characteristic_function(&Mat::from_element(1, 1, c(0.6, 0.0)), 1e-10).unwrap();
        let mobius = (z - 0.6) / (1.0 - z * 0.6);
        assert!((th.eval(z).unwrap()[(0, 0)] - mobius).norm() < 1e-14);
        let rep = th.boundary_report(32).unwrap();
        assert!(rep["unimodularity"] < 1e-12);
        assert!(rep["delta_max"] < 1e-6);
        let zm = characteristic_function(&Mat::zeros(3, 3), 1e-10).unwrap();
        let v = zm.eval(z).unwrap();
        assert_eq!(v.shape(), (3, 3));
        assert!(op_norm(&(v.adjoint() * &v - Mat::identity(3, 3).map(|w| w * z.norm_sqr()))) < 1e-14);
    }

    #[test]
    fn theta_singular_on_unitary() {
        let th = characteristic_function(&Mat::from_element(1, 1, c(1.0, 0.0)), 1e-10).unwrap();
        // Both defect spaces vanish, so Θ is the empty matrix and never singular.
        assert_eq!(th.eval(c(1.0, 0.0)).unwrap().shape(), (0, 0));
    }

    #[test]
    fn schaffer_scalar_example() {
        let t = scalar(&[c(1.2, 0.0), c(0.5, 0.0)]);
        let f = solve_fundamental(&t, Which::Forward, 1e-10).unwrap();
        let m = schaffer_model(&t, &f, &DilateOptions::new(1e-10).with_degree(8)).unwrap();
        assert!(m.report.passed(), "{:?}", m.report);
        assert!(m.report.get("commutation_interior").unwrap() < 1e-12);
        let v = verify_model(&m, &t, 8, 1e-10).unwrap();
        assert!(v.worst < 1e-10, "{:?}", v.report);
        assert_eq!(v.words.len(), (1 << 9) - 1);
    }

    #[test]
    fn schaffer_zero_tuple() {
        let t = OperatorTuple::new(vec![Mat::zeros(2, 2), Mat::zeros(2, 2)]).unwrap();
        let f = solve_fundamental(&t, Which::Forward, 1e-10).unwrap();
        let m = schaffer_model(&t, &f, &DilateOptions::new(1e-10).with_degree(4)).unwrap();
        let vn = m.model_tuple.last();
        let mut p = vn.clone();
        for _ in 0..3 {
            let top = (m.embed.adjoint() * &p * &m.embed).norm();
            assert_eq!(top, 0.0);
            p = &p * vn;
        }
        assert!(m.report.passed());
    }

    #[test]
    fn douglas_scalar_examples() {
        let t = scalar(&[c(0.0, 0.0), c(0.0, 0.0)]);
        let e = solve_fundamental(&t, Which::Adjoint, 1e-10).unwrap();
        let m = douglas_model(&t, &e, &DilateOptions::new(1e-10).with_degree(3)).unwrap();
        assert_eq!(m.model_dim(), 4);
        assert!(m.report.passed(), "{:?}", m.report);

        let t = scalar(&[c(1.2, 0.0), c(0.5, 0.0)]);
        let e = solve_fundamental(&t, Which::Adjoint, 1e-10).unwrap();
        let n = 16;
        let m = douglas_model(&t, &e, &DilateOptions::new(1e-10).with_degree(n)).unwrap();
        for i in 1..=2 {
            let r = m.report.get(&format!("intertwining_{i}")).unwrap();
            assert!(r <= 2.0 * 0.5f64.powi(n as i32 + 1), "{r}");
        }
        assert!(m.report.passed(), "{:?}", m.report);
    }

    #[test]
    fn douglas_unitary_collapses() {
        let w = C64::from_polar(1.0, 0.9);
        let t = scalar(&crate::symdomain::symmetrize(&[w, c(1.0, 0.0)]));
        let e = solve_fundamental(&t, Which::Adjoint, 1e-10).unwrap();
        let m = douglas_model(&t, &e, &DilateOptions::new(1e-10)).unwrap();
        assert_eq!(m.model_dim(), 1);
        assert!((m.embed[(0, 0)].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nf_scalar_and_refusals() {
        let t = scalar(&[c(0.6, 0.0), c(0.6, 0.0)]);
        let e = solve_fundamental(&t, Which::Adjoint, 1e-10).unwrap();
        let opts = DilateOptions::new(1e-10).with_degree(30);
        let m = nagy_foias_model(&t, &e, &opts).unwrap();
        assert!(m.report.passed(), "{:?}", m.report);
        let vn = m.model_tuple.last();
        let comp = m.embed.adjoint() * vn * &m.embed;
        assert!((comp[(0, 0)] - 0.6).norm() < 1e-8);

        let w = C64::from_polar(1.0, 0.4);
        let u = scalar(&crate::symdomain::symmetrize(&[w, w]));
        let e = solve_fundamental(&u, Which::Adjoint, 1e-10).unwrap();
        assert!(matches!(nagy_foias_model(&u, &e, &opts), Err(Error::NotCnu(_))));
        let bad = DilateOptions { grid: 10, ..opts };
        assert!(matches!(
            nagy_foias_model(&t, &solve_fundamental(&t, Which::Adjoint, 1e-10).unwrap(), &bad),
            Err(Error::GridInadequate { .. })
        ));
    }

    #[test]
    fn factorize_identity_and_padding() {
        let t = scalar(&[c(0.4, 0.1), c(0.3, -0.2)]);
        let f = solve_fundamental(&t, Which::Forward, 1e-10).unwrap();
        let m = schaffer_model(&t, &f, &DilateOptions::new(1e-10).with_degree(5)).unwrap();
        let x = factorize(&m, &m, 1e-10).unwrap();
        assert!(op_norm(&(&x.xi - Mat::identity(m.model_dim(), m.model_dim()))) < 1e-8);
        assert!(x.unitary && x.surjective);

        let w = C64::from_polar(1.0, 1.1);
        let u = scalar(&crate::symdomain::symmetrize(&[w, c(-1.0, 0.0)]));
        let padded = pad_with_unitary(&m, &u, 1e-10).unwrap();
        let x = factorize(&padded, &m, 1e-10).unwrap();
        assert!(!x.surjective);
        let k = m.model_dim();
        let mut expect = Mat::zeros(k + 1, k + 1);
        expect.view_mut((0, 0), (k, k)).fill_with_identity();
        assert!(op_norm(&(&x.range_projection - expect)) < 1e-8);
        assert!(x.report.get("isometry").unwrap() < 1e-8);
    }

    #[test]
    fn factorize_douglas_vs_schaffer_scalar() {
        let t = scalar(&[c(0.5, 0.2), c(0.3, 0.1)]);
        let f = solve_fundamental(&t, Which::Forward, 1e-10).unwrap();
        let e = solve_fundamental(&t, Which::Adjoint, 1e-10).unwrap();
        let ns = 5;
        let sc = schaffer_model(&t, &f, &DilateOptions::new(1e-10).with_degree(ns)).unwrap();
        let nd = ns + 1 + degree_for_tail(op_norm(t.last()), 1e-12);
        let dg = douglas_model(&t, &e, &DilateOptions::new(1e-10).with_degree(nd)).unwrap();
        let x = factorize(&dg, &sc, 1e-8).unwrap();
        assert!(x.unitary, "{:?}", x.report);
        assert!(x.report.get("embedding").unwrap() < 1e-8);
    }
}
