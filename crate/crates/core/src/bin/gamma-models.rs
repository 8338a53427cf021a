use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gamma_models::cli::{self, GenParams, LoadedTuple, ModelChoice, PencilFamily, Recipe, RunConfig};
use gamma_models::fundops::Which;
use gamma_models::io;
use gamma_models::models::DilationModel;
use gamma_models::{Error, Result, C64};

/// Exit status when a residual exceeds its budget or a certificate is refuted.
const EXIT_BUDGET: u8 = 1;
/// Exit status for library and input errors (usage errors use clap's 2).
const EXIT_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "gamma-models", version, about = "Γₙ-contraction certification, fundamental operators, Wold decompositions and dilation models")]
struct Cli {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Cap on worker threads.
    #[arg(long, env = "GAMMA_MODELS_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Numerical tolerance.
    #[arg(long, default_value_t = 1e-8, global = true)]
    tol: f64,
    /// Hardy-space truncation degree N.
    #[arg(long, default_value_t = 16, global = true)]
    degree: usize,
    /// Torus grid size M (at least 2N+1).
    #[arg(long, default_value_t = 64, global = true)]
    grid: usize,
    /// Certification polynomial degree (default 2n).
    #[arg(long, global = true)]
    poly_degree: Option<usize>,
    /// Random polynomial trials during certification.
    #[arg(long, default_value_t = 200, global = true)]
    trials: usize,
    /// Boundary sampling density.
    #[arg(long, default_value_t = 48, global = true)]
    density: usize,
    /// Word length L for compression checks.
    #[arg(long, default_value_t = 6, global = true)]
    words: usize,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
}

impl ConfigArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            tol: self.tol,
            degree: self.degree,
            grid: self.grid,
            poly_degree: self.poly_degree,
            trials: self.trials,
            density: self.density,
            words: self.words,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a tuple document from a recipe.
    Gen {
        #[arg(value_enum)]
        recipe: RecipeArg,
        /// Arity n.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Dimension (diagonal, random_commuting, gamma_unitary, compression nodes, unitary summand).
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Polydisc point for `scalar`, as `re,im` pairs separated by spaces or semicolons.
        #[arg(long)]
        z: Option<String>,
        /// Radius of the polydisc or disc that random points are drawn from.
        #[arg(long, default_value_t = 0.8)]
        radius: f64,
        /// Coefficient dimension r of pencil recipes.
        #[arg(long, default_value_t = 1)]
        coeff_dim: usize,
        #[arg(long, value_enum, default_value_t = FamilyArg::Torus)]
        family: FamilyArg,
        /// Numerical radius of `E` for the radius family.
        #[arg(long, default_value_t = 0.9)]
        scale: f64,
        /// Output file (stdout when omitted).
        out: Option<PathBuf>,
    },
    /// Certify the finest Γₙ-class of a tuple (or of a model's tuple).
    Certify { input: PathBuf, out: Option<PathBuf> },
    /// Solve the fundamental operator equations.
    Fundamental {
        input: PathBuf,
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = WhichArg::Forward)]
        which: WhichArg,
    },
    /// Wold decomposition of a Γₙ-isometry.
    Wold { input: PathBuf, out: Option<PathBuf> },
    /// Canonical Γₙ-unitary of a Γₙ-contraction.
    Canonical {
        input: PathBuf,
        out: Option<PathBuf>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Build a dilation model with its verification report.
    Dilate {
        input: PathBuf,
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Also write the model tuple as a tuple document (with its interior).
        #[arg(long)]
        emit_tuple: Option<PathBuf>,
    },
    /// Factorization map from a minimal model into a general one.
    Factorize {
        general: PathBuf,
        minimal: PathBuf,
        out: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Re-verify a model against its tuple.
    Verify {
        model: PathBuf,
        input: PathBuf,
        out: Option<PathBuf>,
        /// Also certify the model tuple as a Γₙ-isometry at truncation.
        #[arg(long)]
        classify: bool,
    },
    /// Print residuals and budgets found in any output document.
    Report { input: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
#[value(rename_all = "snake_case")]
enum RecipeArg {
    Scalar,
    Diagonal,
    Pencil,
    DirectSum,
    RandomCommuting,
    Compression,
    GammaUnitary,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    Torus,
    Radius,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum WhichArg {
    Forward,
    Adjoint,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Douglas,
    Nf,
    Schaffer,
}

fn parse_point(s: &str) -> Result<Vec<C64>> {
    s.split(|c: char| c == ';' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let mut it = pair.split(',');
            let re = it.next().and_then(|x| x.trim().parse::<f64>().ok());
            let im = it.next().map_or(Some(0.0), |x| x.trim().parse::<f64>().ok());
            match (re, im, it.next()) {
                (Some(re), Some(im), None) => Ok(C64::new(re, im)),
                _ => Err(Error::Parse(format!("bad complex number `{pair}`"))),
            }
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn emit<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => io::write_file(p, value),
        None => {
            println!("{}", io::to_string(value)?);
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<LoadedTuple> {
    cli::load_tuple(&read(path)?)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = cli.cfg.config();
    match cli.cmd {
        Command::Gen {
            recipe,
            n,
            dim,
            z,
            radius,
            coeff_dim,
            family,
            scale,
            out,
        } => {
            let recipe = match recipe {
                RecipeArg::Scalar => Recipe::Scalar,
                RecipeArg::Diagonal => Recipe::Diagonal,
                RecipeArg::Pencil => Recipe::Pencil,
                RecipeArg::DirectSum => Recipe::DirectSum,
                RecipeArg::RandomCommuting => Recipe::RandomCommuting,
                RecipeArg::Compression => Recipe::Compression,
                RecipeArg::GammaUnitary => Recipe::GammaUnitary,
            };
            let z = z.as_deref().map(parse_point).transpose()?;
            let n = z.as_ref().map_or(n, |z| z.len());
            let params = GenParams {
                n,
                dim,
                z,
                radius,
                degree: cfg.degree,
                coeff_dim,
                family: match family {
                    FamilyArg::Torus => PencilFamily::Torus,
                    FamilyArg::Radius => PencilFamily::Radius,
                },
                scale,
            };
            emit(out.as_deref(), &cli::cmd_gen(recipe, &params, cfg.seed)?)?;
            Ok(true)
        }
        Command::Certify { input, out } => {
            let cert = cli::cmd_certify(&load(&input)?, &cfg)?;
            emit(out.as_deref(), &cert)?;
            Ok(cli::certificate_passed(&cert))
        }
        Command::Fundamental { input, out, which } => {
            let which = match which {
                WhichArg::Forward => Which::Forward,
                WhichArg::Adjoint => Which::Adjoint,
            };
            let res = cli::cmd_fundamental(&load(&input)?.tuple, which, &cfg)?;
            emit(out.as_deref(), &res)?;
            Ok(res.passed)
        }
        Command::Wold { input, out } => {
            let t = load(&input)?.tuple;
            let w = cli::cmd_wold(&t, &cfg)?;
            emit(out.as_deref(), &w)?;
            Ok(cli::wold_passed(&w, &t, cfg.tol))
        }
        Command::Canonical { input, out, max_iter } => {
            let c = cli::cmd_canonical(&load(&input)?.tuple, max_iter, &cfg)?;
            emit(out.as_deref(), &c)?;
            Ok(cli::canonical_passed(&c, cfg.tol))
        }
        Command::Dilate {
            input,
            out,
            kind,
            emit_tuple,
        } => {
            let kind = match kind {
                KindArg::Douglas => ModelChoice::Douglas,
                KindArg::Nf => ModelChoice::Nf,
                KindArg::Schaffer => ModelChoice::Schaffer,
            };
            let t = load(&input)?.tuple;
            let model = cli::cmd_dilate(&t, kind, &cfg)?;
            if let Some(p) = emit_tuple {
                let mut doc = io::TupleDocument::from_tuple(&model.model_tuple);
                doc.interior = Some(model.interior.clone());
                io::write_file(&p, &doc)?;
            }
            emit(out.as_deref(), &model)?;
            Ok(model.report.passed())
        }
        Command::Factorize {
            general,
            minimal,
            out,
            horizon,
        } => {
            let g: DilationModel = io::from_str(&read(&general)?)?;
            let m: DilationModel = io::from_str(&read(&minimal)?)?;
            let f = cli::cmd_factorize(&g, &m, horizon, &cfg)?;
            emit(out.as_deref(), &f)?;
            Ok(f.report.passed())
        }
        Command::Verify {
            model,
            input,
            out,
            classify,
        } => {
            let m: DilationModel = io::from_str(&read(&model)?)?;
            let r = cli::cmd_verify(&m, &load(&input)?.tuple, classify, &cfg)?;
            emit(out.as_deref(), &r)?;
            Ok(r.passed)
        }
        Command::Report { input } => {
            let (lines, ok) = cli::cmd_report(&read(&input)?)?;
            for l in &lines {
                let budget = l.budget.map_or("-".to_string(), |b| format!("{b:.3e}"));
                let mark = if l.ok { "ok" } else { "FAIL" };
                println!("{:<48} {:>12.3e} {:>12} {}", l.path, l.residual, budget, mark);
            }
            println!("overall: {}", if ok { "pass" } else { "fail" });
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignored if a pool already exists; there is none at this point.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_BUDGET),
        Err(e) => {
            let msg = serde_json::json!({
                "error": e.code(),
                "code": e.numeric_code(),
                "message": e.to_string(),
            });
            eprintln!("{msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
