//! The `pls-attn` command line.
//!
//! Exit codes: 0 on success, 1 for input, shape or configuration errors, 2
//! for numerical failures (degenerate data, divergence, a failed gradient
//! check). Human-readable numbers are printed with 6 significant digits;
//! CSV outputs carry full precision.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attention::{
    attention_weights, cross_attention, cross_attention_weights, encoder_block, ffn,
    pls_to_attention, self_attention, AttentionParams, FfnParams,
};
use crate::dataio::{load_csv, load_model, save_model, write_csv, Dataset, FloatFormat};
use crate::descent::gradcheck::{run_gradcheck_with, GradCheckConfig};
use crate::descent::{
    euclidean_gradients, fit_descent, loss_eval, DescentTrace, Gradients, Init, LossConfig,
    OptimizerConfig,
};
use crate::error::{Error, Result};
use crate::matcore::{principal_angles, Matrix, DEFAULT_LAYER_NORM_EPS};
use crate::pls::{fit_cross_covariance, rmse, DMode, InnerRelation, PlsModel, Solver};

/// Environment variable selecting the log level: `quiet`, `info` or `trace`.
pub const LOG_ENV: &str = "PLS_ATTN_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "pls-attn",
    version,
    about = "Partial least squares by SVD or Stiefel-manifold descent, and attention blocks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: CliConfig,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write it to --model.
    Fit,
    /// Predict responses for --x with --model, written to --out.
    Predict,
    /// Check the analytic loss gradients against finite differences.
    Gradcheck {
        /// Perturb one gradient block before comparing (negative control).
        #[arg(long, value_enum, hide = true)]
        corrupt_gradient: Option<BlockArg>,
    },
    /// Fit with both solvers and compare objectives, subspaces and the
    /// attention bridge; the report goes to --out.
    Compare,
    /// Run encoder, cross attention and FFN with seeded weights; matrices
    /// are written into the --out directory.
    AttnDemo {
        /// Use all-zero weights and biases.
        #[arg(long)]
        zero_weights: bool,
    },
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Predictor CSV.
    #[arg(long, global = true)]
    pub x: Option<PathBuf>,
    /// Response CSV.
    #[arg(long, global = true)]
    pub y: Option<PathBuf>,
    /// Model file (written by fit, read by predict).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Output path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Number of latent components l.
    #[arg(long, global = true, default_value_t = 2)]
    pub components: usize,
    #[arg(long, global = true, value_enum, default_value_t = SolverArg::Svd)]
    pub solver: SolverArg,
    /// X reconstruction weight [default: 0; gradcheck cycles 0, 0.5, 10 when unset].
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Y reconstruction weight [default: 0; gradcheck cycles 0, 0.5, 10 when unset].
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Initial step size of the descent solver.
    #[arg(long, global = true, default_value_t = 1e-2, allow_negative_numbers = true)]
    pub lr: f64,
    #[arg(long, global = true, default_value_t = 5000)]
    pub max_iters: usize,
    #[arg(long, global = true, default_value_t = 1e-8, allow_negative_numbers = true)]
    pub grad_tol: f64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = DModeArg::Diagonal)]
    pub d_mode: DModeArg,
    /// Input CSVs start with a header row.
    #[arg(long, global = true)]
    pub header: bool,
    /// Write hexadecimal float text (exact round trip).
    #[arg(long, global = true)]
    pub hex_floats: bool,
    /// Start the descent solver from the SVD solution instead of a random point.
    #[arg(long, global = true)]
    pub warm_start: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Svd,
    Descent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DModeArg {
    Diagonal,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlockArg {
    #[value(name = "P", alias = "p")]
    P,
    #[value(name = "Q", alias = "q")]
    Q,
    #[value(name = "D", alias = "d")]
    D,
}

impl From<DModeArg> for DMode {
    fn from(d: DModeArg) -> Self {
        match d {
            DModeArg::Diagonal => DMode::Diagonal,
            DModeArg::General => DMode::General,
        }
    }
}

impl CliConfig {
    fn format(&self) -> FloatFormat {
        if self.hex_floats {
            FloatFormat::Hex
        } else {
            FloatFormat::Decimal
        }
    }

    fn loss(&self) -> Result<LossConfig> {
        LossConfig::new(self.alpha.unwrap_or(0.0), self.beta.unwrap_or(0.0))
    }

    fn optimizer(&self) -> Result<OptimizerConfig> {
        let cfg = OptimizerConfig {
            step_size: self.lr,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            d_mode: self.d_mode.into(),
            seed: self.seed,
            init: if self.warm_start {
                Init::WarmStart
            } else {
                Init::Random
            },
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn load_x(&self) -> Result<Matrix> {
        load_csv(required(&self.x, "--x")?, self.header)
    }

    fn load_xy(&self) -> Result<(Matrix, Matrix)> {
        let x = self.load_x()?;
        let y = load_csv(required(&self.y, "--y")?, self.header)?;
        Ok((x, y))
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Config(format!("{flag} is required")))
}

/// Formats like C's `%g`: 6 significant digits, trailing zeros dropped.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        trim_zeros(&format!("{x:.*}", (5 - exp) as usize))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&a| fmt_g(a)).collect();
    format!("[{}]", parts.join(", "))
}

fn init_logging() -> Result<()> {
    let level = match std::env::var(LOG_ENV) {
        Err(_) => log::LevelFilter::Warn,
        Ok(v) => match v.as_str() {
            "quiet" => log::LevelFilter::Off,
            "info" => log::LevelFilter::Info,
            "trace" => log::LevelFilter::Trace,
            other => {
                return Err(Error::Config(format!(
                    "{LOG_ENV} must be quiet, info or trace, got {other:?}"
                )))
            }
        },
    };
    // a second call in the same process keeps the first logger
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
    log::set_max_level(level);
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(e) = init_logging() {
        eprintln!("error: {e}");
        return 1;
    }
    let cfg = &cli.config;
    let outcome = match &cli.command {
        Command::Fit => cmd_fit(cfg),
        Command::Predict => cmd_predict(cfg),
        Command::Gradcheck { corrupt_gradient } => cmd_gradcheck(cfg, *corrupt_gradient),
        Command::Compare => cmd_compare(cfg),
        Command::AttnDemo { zero_weights } => cmd_attn_demo(cfg, *zero_weights),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// `model.json` -> `model.trace.csv`, next to the model.
pub fn trace_path(model: &Path) -> PathBuf {
    model.with_extension("trace.csv")
}

fn fit_svd(ds: &Dataset, cfg: &CliConfig) -> Result<PlsModel> {
    let model = fit_cross_covariance(ds, cfg.components)?;
    let mode = DMode::from(cfg.d_mode);
    if mode == model.inner().mode() {
        return Ok(model);
    }
    PlsModel::new(
        model.p().clone(),
        model.q().clone(),
        model.inner().with_mode(mode),
        model.x_mean().to_vec(),
        model.y_mean().to_vec(),
        Solver::Svd,
    )
}

/// Runs the descent solver; on divergence the partial trace is written to
/// `trace_out` (when given) before the error is returned.
fn fit_desc(
    ds: &Dataset,
    cfg: &CliConfig,
    trace_out: Option<&Path>,
) -> Result<(PlsModel, DescentTrace)> {
    let loss = cfg.loss()?;
    let opt = cfg.optimizer()?;
    match fit_descent(ds, cfg.components, &loss, &opt) {
        Err(Error::Divergence { iteration, trace }) => {
            if let Some(path) = trace_out {
                trace.write_csv(path)?;
                eprintln!("partial trace written to {}", path.display());
            }
            Err(Error::Divergence { iteration, trace })
        }
        other => other,
    }
}

pub fn cmd_fit(cfg: &CliConfig) -> Result<i32> {
    let model_path = required(&cfg.model, "--model")?;
    let (x, y) = cfg.load_xy()?;
    let ds = Dataset::centered(x.clone(), y.clone())?;
    let trace_file = trace_path(model_path);
    let model = match cfg.solver {
        SolverArg::Svd => fit_svd(&ds, cfg)?,
        SolverArg::Descent => {
            let (model, trace) = fit_desc(&ds, cfg, Some(&trace_file))?;
            trace.write_csv(&trace_file)?;
            println!("final loss: {}", fmt_g(trace.final_loss()));
            println!("iterations: {} ({:?})", trace.iterations(), trace.stop);
            println!("trace: {}", trace_file.display());
            model
        }
    };
    let err = rmse(&model.predict(&x)?, &y)?;
    save_model(&model, model_path, cfg.format())?;
    println!("solver: {}", model.solver().as_str());
    println!("components: {}", model.components());
    println!("training RMSE: {}", fmt_g(err));
    println!("model: {}", model_path.display());
    Ok(0)
}

pub fn cmd_predict(cfg: &CliConfig) -> Result<i32> {
    let model = load_model(required(&cfg.model, "--model")?)?;
    let out = required(&cfg.out, "--out")?;
    let x = cfg.load_x()?;
    let yhat = model.predict(&x)?;
    write_csv(out, &yhat, cfg.format())?;
    println!(
        "wrote {}x{} predictions to {}",
        yhat.rows(),
        yhat.cols(),
        out.display()
    );
    Ok(0)
}

pub fn cmd_gradcheck(cfg: &CliConfig, corrupt: Option<BlockArg>) -> Result<i32> {
    let gc = GradCheckConfig {
        seed: cfg.seed,
        alpha: cfg.alpha,
        beta: cfg.beta,
        ..Default::default()
    };
    let gradient = move |x: &Matrix,
                         y: &Matrix,
                         p: &Matrix,
                         q: &Matrix,
                         d: &InnerRelation,
                         c: &LossConfig|
          -> Result<Gradients> {
        let mut g = euclidean_gradients(x, y, p, q, d, c)?;
        match corrupt {
            None => {}
            Some(BlockArg::P) => g.p[(0, 0)] += 1.0,
            Some(BlockArg::Q) => g.q[(0, 0)] += 1.0,
            Some(BlockArg::D) => {
                g.d = match g.d {
                    InnerRelation::Diagonal(mut v) => {
                        v[0] += 1.0;
                        InnerRelation::Diagonal(v)
                    }
                    InnerRelation::General(mut m) => {
                        m[(0, 0)] += 1.0;
                        InnerRelation::General(m)
                    }
                }
            }
        }
        Ok(g)
    };
    let report = run_gradcheck_with(&gc, &gradient)?;
    println!(
        "configurations: {}, entries: {}",
        report.configurations, report.entries
    );
    println!(
        "max relative error: {} (tolerance {})",
        fmt_g(report.max_rel_error),
        fmt_g(gc.tolerance)
    );
    if report.passed {
        println!("gradcheck passed");
        Ok(0)
    } else {
        println!(
            "gradcheck FAILED: block {} in configuration {}",
            report.worst_block, report.worst_configuration
        );
        Ok(2)
    }
}

/// One row of the compare report.
struct SolverRow {
    solver: Solver,
    objective: f64,
    rmse: f64,
    bridge_residual: f64,
}

pub fn cmd_compare(cfg: &CliConfig) -> Result<i32> {
    let out = required(&cfg.out, "--out")?;
    let (x, y) = cfg.load_xy()?;
    let ds = Dataset::centered(x.clone(), y.clone())?;
    let loss = cfg.loss()?;

    let svd = fit_svd(&ds, cfg)?;
    let (desc, trace) = fit_desc(&ds, cfg, None)?;

    let row = |model: &PlsModel| -> Result<SolverRow> {
        let objective = loss_eval(ds.x(), ds.y(), model.p(), model.q(), model.inner(), &loss)?;
        let yhat = model.predict(&x)?;
        let bridged = pls_to_attention(model).forward(&x)?;
        Ok(SolverRow {
            solver: model.solver(),
            objective,
            rmse: rmse(&yhat, &y)?,
            bridge_residual: bridged.max_abs_diff(&yhat),
        })
    };
    let rows = [row(&svd)?, row(&desc)?];
    let angles_p = principal_angles(svd.p(), desc.p())?;
    let angles_q = principal_angles(svd.q(), desc.q())?;
    let max_p = angles_p.last().copied().unwrap_or(0.0);
    let max_q = angles_q.last().copied().unwrap_or(0.0);

    for r in &rows {
        println!(
            "{:<8} loss {:<12} RMSE {:<12} bridge residual {}",
            r.solver.as_str(),
            fmt_g(r.objective),
            fmt_g(r.rmse),
            fmt_g(r.bridge_residual)
        );
    }
    println!(
        "descent/svd loss ratio: {}",
        fmt_g(rows[1].objective / rows[0].objective)
    );
    println!(
        "descent: {} iterations ({:?})",
        trace.iterations(),
        trace.stop
    );
    println!("principal angles P: {}", fmt_list(&angles_p));
    println!("principal angles Q: {}", fmt_list(&angles_q));

    let mut csv =
        String::from("solver,objective,rmse,bridge_residual,max_angle_p,max_angle_q\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?}\n",
            r.solver.as_str(),
            r.objective,
            r.rmse,
            r.bridge_residual,
            max_p,
            max_q
        ));
    }
    std::fs::write(out, csv).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    println!("report: {}", out.display());
    Ok(0)
}

/// Seeded weights scaled by `1/√fan_in`, or zeros.
fn demo_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng, zero: bool) -> Matrix {
    if zero {
        return Matrix::zeros(rows, cols);
    }
    Matrix::random_normal(rows, cols, rng).scale(1.0 / (rows as f64).sqrt())
}

fn max_row_sum_error(w: &Matrix) -> f64 {
    w.row_iter()
        .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

pub fn cmd_attn_demo(cfg: &CliConfig, zero_weights: bool) -> Result<i32> {
    let out = required(&cfg.out, "--out")?;
    let (x, y) = cfg.load_xy()?;
    let (m, p, l) = (x.cols(), y.cols(), cfg.components);
    if l != m {
        return Err(Error::dim(format!(
            "the encoder adds its input back as a residual, so its width must equal the \
             predictor count: --components is {l} but X has {m} columns"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let enc = AttentionParams::new(
        demo_matrix(m, l, &mut rng, zero_weights),
        demo_matrix(m, l, &mut rng, zero_weights),
        demo_matrix(m, l, &mut rng, zero_weights),
    )?;
    let cross = AttentionParams::new(
        demo_matrix(p, l, &mut rng, zero_weights),
        demo_matrix(l, l, &mut rng, zero_weights),
        demo_matrix(l, l, &mut rng, zero_weights),
    )?;
    let bias = |len: usize, rng: &mut ChaCha8Rng| demo_matrix(1, len, rng, zero_weights).into_vec();
    let w1 = demo_matrix(l, l, &mut rng, zero_weights);
    let b1 = bias(l, &mut rng);
    let w2 = demo_matrix(l, p, &mut rng, zero_weights);
    let b2 = bias(p, &mut rng);
    let net = FfnParams::new(w1, b1, w2, b2)?;

    let eps = DEFAULT_LAYER_NORM_EPS;
    let x_f = encoder_block(&x, &enc, eps)?;
    let enc_weights = attention_weights(&x, &enc)?;
    let decoded = cross_attention(&x_f, &y, &cross)?;
    let cross_weights = cross_attention_weights(&x_f, &y, &cross)?;
    let output = ffn(&decoded, &net)?;

    std::fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let fmt = cfg.format();
    for (name, mat) in [
        ("encoder_weights.csv", &enc_weights),
        ("encoder.csv", &x_f),
        ("cross_weights.csv", &cross_weights),
        ("cross_attention.csv", &decoded),
        ("ffn.csv", &output),
    ] {
        write_csv(out.join(name), mat, fmt)?;
    }

    let mut perm: Vec<usize> = (0..x.rows()).collect();
    perm.shuffle(&mut rng);
    let x_perm = x.select_rows(&perm);
    let equivariance = self_attention(&x_perm, &enc)?
        .max_abs_diff(&self_attention(&x, &enc)?.select_rows(&perm));
    let row_mean = x_f
        .row_iter()
        .map(|r| (r.iter().sum::<f64>() / r.len() as f64).abs())
        .fold(0.0, f64::max);

    println!("encoder output: {}x{}", x_f.rows(), x_f.cols());
    println!("cross attention output: {}x{}", decoded.rows(), decoded.cols());
    println!("ffn output: {}x{}", output.rows(), output.cols());
    println!(
        "max |row sum - 1|: encoder {}, cross {}",
        fmt_g(max_row_sum_error(&enc_weights)),
        fmt_g(max_row_sum_error(&cross_weights))
    );
    println!("max |encoder row mean|: {}", fmt_g(row_mean));
    println!("permutation equivariance residual: {}", fmt_g(equivariance));
    println!("outputs: {}", out.display());
    Ok(0)
}
