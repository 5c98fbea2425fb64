use clap::{Parser, Subcommand, ValueEnum};
use nssol::blowup::{self, DEFAULT_DENSITY_THRESHOLD};
use nssol::config::{linspace, ConfigError, OutputFormat, RunConfig};
use nssol::fields::{eval_grid, FieldError};
use nssol::model::{validate, Family};
use nssol::profiles::{Profile, ProfileError};
use nssol::residual::ResidualError;
use nssol::scaling::{ScalingError, ScalingFn};
use nssol::solution::{build_profile, build_scaling, build_solution, verify_family, SolutionError, SolveOptions};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Self-similar radial Navier-Stokes solutions and their residual checks.
#[derive(Parser)]
#[command(name = "nssol", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format, overriding the configuration.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Suppress human-readable messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the model and summarize derived constants.
    Describe,
    /// Tabulate the density profile as `z,y,dy`.
    Profile,
    /// Tabulate the scaling function as `t,a,adot`.
    Scale,
    /// Sample the fields as `t,r,rho,u` on the configured grid.
    Field,
    /// Residual norms of the constructed solution.
    Verify,
    /// Vanishing time and center-density blowup.
    Blowup {
        /// Center density to locate.
        #[arg(long, default_value_t = DEFAULT_DENSITY_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    /// Bad configuration or failed validation.
    Config { kind: &'static str, message: String },
    /// Numerical failure while running a valid configuration.
    Runtime { kind: &'static str, message: String },
}

impl Failure {
    fn config(kind: &'static str, message: impl ToString) -> Self {
        Failure::Config {
            kind,
            message: message.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config { .. } => 2,
            Failure::Runtime { .. } => 3,
        }
    }

    fn to_json(&self) -> Value {
        let (kind, message) = match self {
            Failure::Config { kind, message } | Failure::Runtime { kind, message } => (kind, message),
        };
        json!({ "error": kind, "message": message, "exit_code": self.exit_code() })
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::config("config", e)
    }
}

fn profile_kind(e: &ProfileError) -> &'static str {
    match e {
        ProfileError::InvalidParameter(_) => "invalid_parameter",
        ProfileError::OutOfRange { .. } => "profile_out_of_range",
        ProfileError::NonFinite(_) => "non_finite",
        ProfileError::Integration(_) => "step_failure",
    }
}

fn scaling_kind(e: &ScalingError) -> &'static str {
    match e {
        ScalingError::InvalidParameter(_) => "invalid_parameter",
        ScalingError::Domain { .. } => "scaling_domain",
        ScalingError::StepFailure { .. } | ScalingError::Ode(_) => "step_failure",
    }
}

fn field_kind(e: &FieldError) -> &'static str {
    match e {
        FieldError::Profile(p) => profile_kind(p),
        FieldError::Scaling(s) => scaling_kind(s),
        FieldError::NonFinite { .. } => "non_finite",
        FieldError::InvalidGrid(_) => "invalid_grid",
        FieldError::Point { source, .. } => field_kind(source),
    }
}

impl From<SolutionError> for Failure {
    fn from(e: SolutionError) -> Self {
        let message = e.to_string();
        let runtime = |kind| Failure::Runtime {
            kind,
            message: message.clone(),
        };
        match &e {
            SolutionError::Invalid(_) => Failure::config("validation", message),
            SolutionError::Profile(ProfileError::InvalidParameter(_))
            | SolutionError::Scaling(ScalingError::InvalidParameter(_)) => {
                Failure::config("invalid_parameter", message)
            }
            SolutionError::Profile(p) => runtime(profile_kind(p)),
            SolutionError::Scaling(s) => runtime(scaling_kind(s)),
            SolutionError::Field(FieldError::InvalidGrid(_)) => Failure::config("invalid_grid", message),
            SolutionError::Field(f) => runtime(field_kind(f)),
            SolutionError::Residual(ResidualError::InvalidSetup(_)) => {
                Failure::config("invalid_setup", message)
            }
            SolutionError::Residual(ResidualError::StencilOutOfDomain { .. }) => {
                runtime("stencil_out_of_domain")
            }
            SolutionError::Residual(_) => runtime("residual"),
        }
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        SolutionError::Field(e).into()
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_table(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = String::new();
    s.push_str(header);
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn json_doc(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::config("io", format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::config("io", e))
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    out: Option<PathBuf>,
    format: OutputFormat,
    quiet: bool,
}

impl Ctx {
    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        write_out(self.out_path().as_deref(), text)
    }

    fn out_path(&self) -> Option<PathBuf> {
        self.out
            .clone()
            .or_else(|| self.cfg.output.as_ref().and_then(|o| o.path.clone()))
    }
}

fn cmd_describe(ctx: &Ctx) -> Result<(), Failure> {
    let cfg = &ctx.cfg;
    let outcome = validate(&cfg.model, &cfg.family);
    let (vanishing, stated) = match cfg.family {
        Family::WithPressurePowerLaw { m, n, .. } if m < 0.0 => (Some(-n / m), Some(-m / n)),
        _ => (None, None),
    };
    let mut summary = json!({
        "family": cfg.family.name(),
        "valid": outcome.is_ok(),
        "violations": outcome.violations,
        "theta_required": cfg.model.theta_required(),
        "s": outcome.derived.map(|d| d.s),
        "vanishing_time": vanishing,
    });
    if let Some(t) = stated {
        summary["stated_blowup_time"] = json!(t);
        summary["note"] = json!(format!(
            "a(t) = sigma (m t + n)^s vanishes at t = -n/m = {}; the quoted T = -m/n = {} differs unless m^2 = n^2",
            vanishing.unwrap_or(f64::NAN),
            t
        ));
    }

    let mut text = format!("family: {}\n", cfg.family.name());
    let _ = writeln!(text, "theta_required: {}", cfg.model.theta_required());
    if let Some(d) = outcome.derived {
        let _ = writeln!(text, "s: {}", d.s);
    }
    if let Some(t) = vanishing {
        let _ = writeln!(text, "vanishing_time: {t} (-n/m; quoted -m/n = {})", stated.unwrap_or(f64::NAN));
    }
    for v in &outcome.violations {
        let _ = writeln!(text, "violation: {v}");
    }
    ctx.note(text.trim_end());
    ctx.emit(&json_doc(&summary))?;
    if outcome.is_ok() {
        Ok(())
    } else {
        let list: Vec<String> = outcome.violations.iter().map(ToString::to_string).collect();
        Err(Failure::config("validation", list.join("; ")))
    }
}

fn cmd_profile(ctx: &Ctx) -> Result<(), Failure> {
    let pc = ctx.cfg.profile_config();
    let (profile, _) = build_profile(&ctx.cfg.model, &ctx.cfg.family, ctx.cfg.table_options())?;
    let z_hi = pc.z_max.min(profile.z_max());
    let zs = linspace(0.0, z_hi, pc.samples);
    let mut rows = Vec::with_capacity(zs.len());
    for &z in &zs {
        let s = profile
            .evaluate(z)
            .map_err(|e| Failure::from(SolutionError::Profile(e)))?;
        rows.push(vec![z, s.y, s.dy]);
    }
    let truncation = profile.truncation();
    let text = match ctx.format {
        OutputFormat::Csv => csv_table("z,y,dy", rows.into_iter()),
        OutputFormat::Json => json_doc(&json!({
            "z": zs,
            "y": rows.iter().map(|r| r[1]).collect::<Vec<_>>(),
            "dy": rows.iter().map(|r| r[2]).collect::<Vec<_>>(),
            "truncation": truncation,
        })),
    };
    ctx.emit(&text)?;
    match truncation {
        Some(t) if matches!(profile, Profile::Tabulated(_)) => Err(Failure::Runtime {
            kind: match t.reason {
                nssol::profiles::TruncationReason::SingularCoefficient => "singular_coefficient",
                nssol::profiles::TruncationReason::StepFailure => "step_failure",
            },
            message: format!("profile table truncated at z = {}", t.z),
        }),
        _ => Ok(()),
    }
}

fn scale_times(cfg: &RunConfig) -> Vec<f64> {
    match (&cfg.grid, cfg.scaling_config().t_end) {
        (Some(g), _) => g.t_values(),
        (None, Some(t_end)) => linspace(0.0, t_end, 101),
        (None, None) => linspace(0.0, 1.0, 101),
    }
}

fn status_json(scaling: &ScalingFn) -> Value {
    let mut v = serde_json::to_value(scaling.status()).expect("status serializes");
    v["vanishing_time"] = json!(scaling.vanishing_time());
    v["domain"] = json!([scaling.domain().0, scaling.domain().1]);
    v
}

fn cmd_scale(ctx: &Ctx) -> Result<(), Failure> {
    let ts = scale_times(&ctx.cfg);
    let t_end = ts.iter().copied().fold(0.0, f64::max);
    let scaling = build_scaling(&ctx.cfg.model, &ctx.cfg.family, &ctx.cfg.ivp_options(t_end))?;
    let (lo, hi) = scaling.domain();
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts.iter().filter(|&&t| t >= lo && t <= hi) {
        match scaling.evaluate(t) {
            Ok(s) => rows.push(vec![t, s.a, s.adot]),
            Err(ScalingError::Domain { .. }) => {}
            Err(e) => return Err(SolutionError::Scaling(e).into()),
        }
    }
    let status = status_json(&scaling);
    match ctx.format {
        OutputFormat::Csv => {
            ctx.emit(&csv_table("t,a,adot", rows.into_iter()))?;
            let doc = json_doc(&status);
            match ctx.out_path() {
                Some(p) => {
                    let mut side = p.into_os_string();
                    side.push(".status.json");
                    write_out(Some(Path::new(&side)), &doc)?;
                }
                None => {
                    if !ctx.quiet {
                        eprint!("{doc}");
                    }
                }
            }
            Ok(())
        }
        OutputFormat::Json => ctx.emit(&json_doc(&json!({
            "t": rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
            "a": rows.iter().map(|r| r[1]).collect::<Vec<_>>(),
            "adot": rows.iter().map(|r| r[2]).collect::<Vec<_>>(),
            "status": status,
        }))),
    }
}

fn cmd_field(ctx: &Ctx) -> Result<(), Failure> {
    let grid = ctx.cfg.grid()?;
    if grid.r_min.is_nan() || grid.r_min <= 0.0 {
        return Err(Failure::config(
            "invalid_grid",
            format!("r_min must be > 0, got {}", grid.r_min),
        ));
    }
    let ts = grid.t_values();
    let rs = grid.r_values();
    let opts = SolveOptions {
        ivp: ctx.cfg.ivp_options(grid.t_max),
        table: ctx.cfg.table_options(),
    };
    let sol = build_solution(&ctx.cfg.model, &ctx.cfg.family, &opts)?;
    let g = eval_grid(sol.field(), &ts, &rs)?;
    let text = match ctx.format {
        OutputFormat::Csv => {
            let rows = (0..ts.len()).flat_map(|i| {
                let g = &g;
                (0..rs.len()).map(move |j| vec![g.t_values[i], g.r_values[j], g.rho_at(i, j), g.u_at(i, j)])
            });
            csv_table("t,r,rho,u", rows)
        }
        OutputFormat::Json => json_doc(&json!({
            "t": g.t_values,
            "r": g.r_values,
            "rho": g.rho,
            "u": g.u,
        })),
    };
    ctx.emit(&text)
}

fn cmd_verify(ctx: &Ctx) -> Result<(), Failure> {
    let v = ctx.cfg.verify()?;
    let opts = SolveOptions {
        ivp: ctx.cfg.ivp_options(v.window.t_max),
        table: ctx.cfg.table_options(),
    };
    let report = verify_family(
        &ctx.cfg.family,
        &ctx.cfg.model,
        &v.window,
        &v.resolutions,
        v.lattice,
        &opts,
    )?;
    ctx.note(&format!(
        "mass_linf = {:e}, mom_linf = {:e} at h_t = {}, h_r = {}",
        report.mass_linf, report.mom_linf, report.h_t, report.h_r
    ));
    ctx.emit(&json_doc(&serde_json::to_value(&report).expect("report serializes")))
}

fn cmd_blowup(ctx: &Ctx, threshold: f64) -> Result<(), Failure> {
    let t_end = ctx
        .cfg
        .scaling_config()
        .t_end
        .or(ctx.cfg.grid.map(|g| g.t_max))
        .unwrap_or(10.0);
    let opts = SolveOptions {
        ivp: ctx.cfg.ivp_options(t_end),
        table: ctx.cfg.table_options(),
    };
    let sol = build_solution(&ctx.cfg.model, &ctx.cfg.family, &opts)?;
    let report = blowup::analyze(sol.field(), threshold);
    ctx.emit(&json_doc(&serde_json::to_value(&report).expect("report serializes")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    nssol::init_threads_from_env().map_err(|e| Failure::config("threads", e))?;
    let path = cli
        .config
        .ok_or_else(|| Failure::config("config", "--config <path> is required"))?;
    let cfg = RunConfig::load(&path)?;
    let format = match cli.format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        None => cfg.output.as_ref().map(|o| o.format).unwrap_or_default(),
    };
    let ctx = Ctx {
        cfg,
        out: cli.out,
        format,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Describe => cmd_describe(&ctx),
        Command::Profile => cmd_profile(&ctx),
        Command::Scale => cmd_scale(&ctx),
        Command::Field => cmd_field(&ctx),
        Command::Verify => cmd_verify(&ctx),
        Command::Blowup { threshold } => cmd_blowup(&ctx, threshold),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}
