//! Command-line front end.
//!
//! Flags override values from an optional `key=value` config file (keys are
//! the long flag names), which override built-in defaults. Exit codes: 0 on
//! success, 1 on invalid input or a failed check, 2 when a numerical
//! procedure does not converge.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::checks;
use crate::clock::dilation_sweep;
use crate::error::{Error, Result};
use crate::flux::{
    ellipsoid_profile, em_radius, flux_radius, make_isotropic_rest, pair_boost_closed_form,
    BalancedPair,
};
use crate::kinematics::SPEED_CEILING;
use crate::mbr::{find_null_frame, synthesize_sky, DEFAULT_T_REST, SPEED_OF_LIGHT_KM_S};
use crate::textio::{fmt17, format_superposition, read_superposition, write_text};
use crate::vector::Vec3;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "wavegroup", version, about = "Wave-superposition particle kinematics and preferred-frame simulations")]
pub struct Cli {
    /// Plain-text key=value file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Boost a superposition read from a file to a target group velocity.
    Boost(BoostArgs),
    /// Emit momentum-flux ellipsoid profiles of a boosted isotropic rest particle.
    Ellipsoid(EllipsoidArgs),
    /// Time-dilation sweep: internal speed V_Z and gamma at each group speed.
    Clock(ClockArgs),
    /// Closed-form balanced-pair transform table.
    Pair(PairArgs),
    /// Search for the frame in which the background temperature dipole vanishes.
    #[command(name = "mbr-find")]
    MbrFind(MbrArgs),
    /// Run every invariant check at desk scale and report pass/fail.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct BoostArgs {
    /// Superposition file: one "px py pz" line per component.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Where to write the boosted superposition.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Target group velocity "vx,vy,vz", or a single speed along +x.
    #[arg(long)]
    pub velocity: Option<String>,
    /// Convergence tolerance on the group velocity [default: 1e-9].
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EllipsoidArgs {
    /// Comma-separated group speeds [default: 0,0.3,0.6,0.9].
    #[arg(long = "v")]
    pub speeds: Option<String>,
    /// Number of balanced pairs in the rest ensemble [default: 10000].
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Number of equal-solid-angle bins [default: 32].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Ensemble seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output path.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClockArgs {
    /// Comma-separated group speeds [default: 0,0.6,0.9].
    #[arg(long)]
    pub speeds: Option<String>,
    /// Rest superposition file; an isotropic ensemble is generated when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Pairs in the generated ensemble [default: 64].
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Ensemble seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output path.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Comma-separated group speeds [default: 0.3,0.6,0.9].
    #[arg(long)]
    pub speeds: Option<String>,
    /// Comma-separated angles from the boost axis in radians [default: 0,pi/6,pi/4,pi/3,pi/2].
    #[arg(long)]
    pub angles: Option<String>,
    /// CSV output path.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MbrArgs {
    /// True observer speed in km/s [default: 350].
    #[arg(long = "speed-kms")]
    pub speed_kms: Option<f64>,
    /// Direction of the observer's motion "x,y,z" [default: 1,0,0].
    #[arg(long)]
    pub direction: Option<String>,
    /// Sky samples per measurement [default: 10000].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Temperature noise standard deviation in kelvin [default: 0].
    #[arg(long)]
    pub noise: Option<f64>,
    /// Rest-frame background temperature in kelvin [default: 2.725].
    #[arg(long = "t-rest")]
    pub t_rest: Option<f64>,
    /// Stop when |dipole|/monopole falls below this [default: 1e-9].
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Sky seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Frame report output path.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional CSV of the first synthesized sky.
    #[arg(long = "sky-output")]
    pub sky_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Superposition file to validate before running the checks.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Base seed for the randomized checks [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Boost,
    Ellipsoid,
    Clock,
    Pair,
    MbrFind,
    Check,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Boost => "boost",
            CommandKind::Ellipsoid => "ellipsoid",
            CommandKind::Clock => "clock",
            CommandKind::Pair => "pair",
            CommandKind::MbrFind => "mbr-find",
            CommandKind::Check => "check",
        }
    }
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub sky_output_path: Option<PathBuf>,
    pub seed: u64,
    pub tolerance: f64,
    pub speeds: Vec<f64>,
    pub angles: Vec<f64>,
    pub velocity: Vec3,
    pub n_pairs: usize,
    pub n_samples: usize,
    pub n_bins: usize,
    pub noise_sigma: f64,
    pub t_rest: f64,
    /// Recorded verbatim in output provenance comments.
    pub command_line: String,
}

impl RunConfig {
    fn defaults(command: CommandKind, command_line: String) -> Self {
        let (speeds, tolerance, n_pairs) = match command {
            CommandKind::Ellipsoid => (vec![0.0, 0.3, 0.6, 0.9], 1e-9, 10_000),
            CommandKind::Clock => (vec![0.0, 0.6, 0.9], 1e-9, 64),
            CommandKind::Pair => (vec![0.3, 0.6, 0.9], 1e-9, 1),
            _ => (Vec::new(), 1e-9, 1),
        };
        RunConfig {
            command,
            input_path: None,
            output_path: None,
            sky_output_path: None,
            seed: 0,
            tolerance,
            speeds,
            angles: vec![0.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, FRAC_PI_2],
            velocity: Vec3::ZERO,
            n_pairs,
            n_samples: 10_000,
            n_bins: 32,
            noise_sigma: 0.0,
            t_rest: DEFAULT_T_REST,
            command_line,
        }
    }

    /// Checks the invariants every command relies on.
    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidArgument(m));
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return invalid(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if let Some(bad) = self.speeds.iter().find(|s| !(0.0..SPEED_CEILING).contains(*s)) {
            return invalid(format!("speed {bad} outside [0, 1 - 1e-9)"));
        }
        let needs_output = !matches!(self.command, CommandKind::Check);
        match &self.output_path {
            Some(p) if p.as_os_str().is_empty() => return invalid("output path is empty".into()),
            None if needs_output => {
                return invalid(format!("{} requires --output", self.command.name()))
            }
            _ => {}
        }
        if self.command == CommandKind::Boost && self.input_path.is_none() {
            return invalid("boost requires --input".into());
        }
        if let Some(p) = &self.input_path {
            if p.as_os_str().is_empty() {
                return invalid("input path is empty".into());
            }
        }
        if self.n_pairs == 0 || self.n_bins == 0 {
            return invalid("pairs and bins must be at least 1".into());
        }
        Ok(())
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            parse_angle_expr(s)
                .ok_or_else(|| Error::InvalidArgument(format!("'{s}' is not a number")))
        })
        .collect()
}

/// Accepts plain reals and the forms `pi`, `pi/k`.
fn parse_angle_expr(s: &str) -> Option<f64> {
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let lower = s.to_ascii_lowercase();
    let rest = lower.strip_prefix("pi")?;
    if rest.is_empty() {
        return Some(std::f64::consts::PI);
    }
    let divisor: f64 = rest.strip_prefix('/')?.parse().ok()?;
    Some(std::f64::consts::PI / divisor)
}

fn parse_vec3(text: &str) -> Result<Vec3> {
    let values = parse_list(text)?;
    match values.as_slice() {
        [s] => Ok(Vec3::X * *s),
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(Error::InvalidArgument(format!(
            "expected one value or three comma-separated values, got '{text}'"
        ))),
    }
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("config key '{key}': '{value}' is not valid")))
}

/// Reads `key=value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: "expected key=value".into(),
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Keys a command accepts from a config file.
fn allowed_keys(command: CommandKind) -> &'static [&'static str] {
    match command {
        CommandKind::Boost => &["input", "output", "velocity", "tolerance"],
        CommandKind::Ellipsoid => &["v", "pairs", "bins", "seed", "output"],
        CommandKind::Clock => &["speeds", "input", "pairs", "seed", "output"],
        CommandKind::Pair => &["speeds", "angles", "output"],
        CommandKind::MbrFind => &[
            "speed-kms", "direction", "samples", "noise", "t-rest", "tolerance", "seed", "output",
            "sky-output",
        ],
        CommandKind::Check => &["input", "seed"],
    }
}

/// Merges flags, config file and defaults into a [`RunConfig`].
pub fn resolve(cli: Cli, command_line: String) -> Result<RunConfig> {
    let kind = match &cli.command {
        CliCommand::Boost(_) => CommandKind::Boost,
        CliCommand::Ellipsoid(_) => CommandKind::Ellipsoid,
        CliCommand::Clock(_) => CommandKind::Clock,
        CliCommand::Pair(_) => CommandKind::Pair,
        CliCommand::MbrFind(_) => CommandKind::MbrFind,
        CliCommand::Check(_) => CommandKind::Check,
    };
    let file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    if let Some(key) = file.keys().find(|k| !allowed_keys(kind).contains(&k.as_str())) {
        return Err(Error::InvalidArgument(format!(
            "config key '{key}' does not apply to {}",
            kind.name()
        )));
    }
    let get = |key: &str| file.get(key).map(String::as_str);

    let mut cfg = RunConfig::defaults(kind, command_line);
    macro_rules! pick {
        ($flag:expr, $key:literal, $parse:expr) => {
            match ($flag, get($key)) {
                (Some(v), _) => Some(v),
                (None, Some(text)) => Some($parse($key, text)?),
                (None, None) => None,
            }
        };
    }
    let path = |_: &str, t: &str| -> Result<PathBuf> { Ok(PathBuf::from(t)) };
    let list = |_: &str, t: &str| parse_list(t);
    let string = |_: &str, t: &str| -> Result<String> { Ok(t.to_string()) };

    match cli.command {
        CliCommand::Boost(a) => {
            cfg.input_path = pick!(a.input, "input", path);
            cfg.output_path = pick!(a.output, "output", path);
            let velocity = pick!(a.velocity, "velocity", string)
                .ok_or_else(|| Error::InvalidArgument("boost requires --velocity".into()))?;
            cfg.velocity = parse_vec3(&velocity)?;
            if let Some(t) = pick!(a.tolerance, "tolerance", parse_number) {
                cfg.tolerance = t;
            }
        }
        CliCommand::Ellipsoid(a) => {
            if let Some(s) = pick!(a.speeds.map(|s| parse_list(&s)).transpose()?, "v", list) {
                cfg.speeds = s;
            }
            if let Some(n) = pick!(a.pairs, "pairs", parse_number) {
                cfg.n_pairs = n;
            }
            if let Some(n) = pick!(a.bins, "bins", parse_number) {
                cfg.n_bins = n;
            }
            if let Some(s) = pick!(a.seed, "seed", parse_number) {
                cfg.seed = s;
            }
            cfg.output_path = pick!(a.output, "output", path);
        }
        CliCommand::Clock(a) => {
            if let Some(s) = pick!(a.speeds.map(|s| parse_list(&s)).transpose()?, "speeds", list) {
                cfg.speeds = s;
            }
            cfg.input_path = pick!(a.input, "input", path);
            if let Some(n) = pick!(a.pairs, "pairs", parse_number) {
                cfg.n_pairs = n;
            }
            if let Some(s) = pick!(a.seed, "seed", parse_number) {
                cfg.seed = s;
            }
            cfg.output_path = pick!(a.output, "output", path);
        }
        CliCommand::Pair(a) => {
            if let Some(s) = pick!(a.speeds.map(|s| parse_list(&s)).transpose()?, "speeds", list) {
                cfg.speeds = s;
            }
            if let Some(s) = pick!(a.angles.map(|s| parse_list(&s)).transpose()?, "angles", list) {
                cfg.angles = s;
            }
            cfg.output_path = pick!(a.output, "output", path);
        }
        CliCommand::MbrFind(a) => {
            let speed_kms: f64 = pick!(a.speed_kms, "speed-kms", parse_number).unwrap_or(350.0);
            let direction = match pick!(a.direction, "direction", string) {
                Some(text) => parse_vec3(&text)?,
                None => Vec3::X,
            };
            let direction = direction
                .normalized()
                .ok_or_else(|| Error::InvalidArgument("direction must be non-zero".into()))?;
            cfg.velocity = direction * (speed_kms / SPEED_OF_LIGHT_KM_S);
            if let Some(n) = pick!(a.samples, "samples", parse_number) {
                cfg.n_samples = n;
            }
            if let Some(x) = pick!(a.noise, "noise", parse_number) {
                cfg.noise_sigma = x;
            }
            if let Some(x) = pick!(a.t_rest, "t-rest", parse_number) {
                cfg.t_rest = x;
            }
            if let Some(t) = pick!(a.tolerance, "tolerance", parse_number) {
                cfg.tolerance = t;
            }
            if let Some(s) = pick!(a.seed, "seed", parse_number) {
                cfg.seed = s;
            }
            cfg.output_path = pick!(a.output, "output", path);
            cfg.sky_output_path = pick!(a.sky_output, "sky-output", path);
        }
        CliCommand::Check(a) => {
            cfg.input_path = pick!(a.input, "input", path);
            if let Some(s) = pick!(a.seed, "seed", parse_number) {
                cfg.seed = s;
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn provenance(cfg: &RunConfig) -> String {
    format!(
        "# wavegroup {VERSION} | {} | seed={}\n",
        cfg.command_line, cfg.seed
    )
}

/// Parses `args` (without the program name) and runs the command.
pub fn main_with_args(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let argv = std::iter::once("wavegroup".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let config = match resolve(cli, args.join(" ")) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    if config.command == CommandKind::Check {
        check_all(&config, out)
    } else {
        run(&config, out, err)
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_non_convergence() {
        2
    } else {
        1
    }
}

/// Executes a validated configuration and prints a one-line summary.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if config.command == CommandKind::Check {
        return check_all(config, out);
    }
    let result = config.validate().and_then(|_| match config.command {
        CommandKind::Boost => run_boost(config),
        CommandKind::Ellipsoid => run_ellipsoid(config),
        CommandKind::Clock => run_clock(config),
        CommandKind::Pair => run_pair(config),
        CommandKind::MbrFind => run_mbr(config),
        CommandKind::Check => unreachable!("handled above"),
    });
    match result {
        Ok(summary) => {
            let _ = writeln!(out, "{summary}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs the invariant suite, after validating `config.input_path` if given.
/// Prints one PASS/FAIL line per check; exit 0 iff all pass.
pub fn check_all(config: &RunConfig, out: &mut dyn Write) -> i32 {
    let mut failures = 0;
    if let Some(path) = &config.input_path {
        match read_superposition(path) {
            Ok(s) => {
                let _ = writeln!(out, "PASS  input file {} ({} components)", path.display(), s.len());
            }
            Err(e) => {
                failures += 1;
                let _ = writeln!(out, "FAIL  input file: {e}");
            }
        }
    }
    for outcome in checks::run_all(config.seed) {
        if !outcome.passed {
            failures += 1;
        }
        let _ = writeln!(
            out,
            "{}  {} ({})",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.name,
            outcome.detail
        );
    }
    let _ = writeln!(
        out,
        "{}",
        if failures == 0 {
            "all checks passed".to_string()
        } else {
            format!("{failures} check(s) failed")
        }
    );
    if failures == 0 {
        0
    } else {
        1
    }
}

fn output_path(cfg: &RunConfig) -> &Path {
    cfg.output_path.as_deref().expect("validated output path")
}

fn run_boost(cfg: &RunConfig) -> Result<String> {
    let input = cfg.input_path.as_deref().expect("validated input path");
    let s = read_superposition(input)?;
    let result = s.boost(cfg.velocity, cfg.tolerance)?;
    let v = result.final_state.group_velocity();
    let header = vec![
        provenance(cfg).trim_start_matches("# ").trim_end().to_string(),
        format!(
            "target_velocity {} {} {}",
            fmt17(cfg.velocity.x),
            fmt17(cfg.velocity.y),
            fmt17(cfg.velocity.z)
        ),
        format!("group_velocity {} {} {}", fmt17(v.x), fmt17(v.y), fmt17(v.z)),
        format!("steps {}", result.steps_taken),
        format!("rest_mass_initial {}", fmt17(result.rest_mass_initial)),
        format!("rest_mass_final {}", fmt17(result.rest_mass_final)),
        format!("rest_mass_drift {}", fmt17(result.rest_mass_drift())),
        format!("momentum_residual {}", fmt17(result.momentum_residual)),
    ];
    write_text(output_path(cfg), &format_superposition(&result.final_state, &header))?;
    Ok(format!(
        "boost: {} components to |V| = {} in {} steps, m0 drift {:e}, |P - gamma m0 V| {:e}",
        s.len(),
        fmt17(v.norm()),
        result.steps_taken,
        result.rest_mass_drift(),
        result.momentum_residual
    ))
}

fn run_ellipsoid(cfg: &RunConfig) -> Result<String> {
    let rest = make_isotropic_rest(cfg.n_pairs, 1.0, cfg.seed)?;
    let mut csv = provenance(cfg);
    let mut body = String::from("v,theta,r_empirical,r_closed_form,r_em\n");
    let mut summary = Vec::new();
    for &v in &cfg.speeds {
        let profile = ellipsoid_profile(&rest, v, cfg.n_bins)?;
        let fit = profile.fit_ellipse()?;
        let _ = writeln!(
            csv,
            "# v={} eccentricity={} max_relative_error={}",
            fmt17(v),
            fmt17(fit.eccentricity),
            fmt17(profile.max_relative_error())
        );
        summary.push(format!(
            "v={v}: e={:.4} err={:.2e}",
            fit.eccentricity,
            profile.max_relative_error()
        ));
        for bin in &profile.bins {
            match bin.sample {
                Some(s) => {
                    let _ = writeln!(
                        body,
                        "{},{},{},{},{}",
                        fmt17(v),
                        fmt17(s.theta),
                        fmt17(s.r),
                        fmt17(flux_radius(v, s.theta)),
                        fmt17(s.r_em)
                    );
                }
                None => {
                    let theta = (0.5 * (bin.cos_lo + bin.cos_hi)).acos();
                    let _ = writeln!(
                        body,
                        "{},{},,{},",
                        fmt17(v),
                        fmt17(theta),
                        fmt17(flux_radius(v, theta))
                    );
                }
            }
        }
    }
    csv.push_str(&body);
    write_text(output_path(cfg), &csv)?;
    Ok(format!(
        "ellipsoid: {} pairs, {} bins; {}",
        cfg.n_pairs,
        cfg.n_bins,
        summary.join("; ")
    ))
}

fn run_clock(cfg: &RunConfig) -> Result<String> {
    let s = match &cfg.input_path {
        Some(path) => read_superposition(path)?,
        None => make_isotropic_rest(cfg.n_pairs, 1.0, cfg.seed)?,
    };
    let reports = dilation_sweep(&s, &cfg.speeds)?;
    let mut csv = provenance(cfg);
    csv.push_str("speed,gamma,v_z,residual\n");
    for (speed, r) in cfg.speeds.iter().zip(&reports) {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt17(*speed),
            fmt17(r.gamma),
            fmt17(r.zitter_speed),
            fmt17(r.identity_residual)
        );
    }
    write_text(output_path(cfg), &csv)?;
    let worst = reports.iter().map(|r| r.identity_residual).fold(0.0, f64::max);
    Ok(format!(
        "clock: {} speeds, max |V_Z - sqrt(1-V^2)| = {worst:e}",
        reports.len()
    ))
}

fn run_pair(cfg: &RunConfig) -> Result<String> {
    let mut csv = provenance(cfg);
    csv.push_str("v,theta,a,b,r\n");
    for &v in &cfg.speeds {
        for &theta in &cfg.angles {
            let t = pair_boost_closed_form(&BalancedPair::in_plane(theta, 1.0)?, v)?;
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                fmt17(v),
                fmt17(theta),
                fmt17(t.a),
                fmt17(t.b),
                fmt17(t.r)
            );
        }
    }
    write_text(output_path(cfg), &csv)?;
    let em = cfg
        .speeds
        .last()
        .map(|&v| em_radius(v, FRAC_PI_2))
        .unwrap_or(1.0);
    Ok(format!(
        "pair: {} rows; transverse em compression at highest speed {}",
        cfg.speeds.len() * cfg.angles.len(),
        fmt17(em)
    ))
}

fn run_mbr(cfg: &RunConfig) -> Result<String> {
    if let Some(path) = &cfg.sky_output_path {
        let sky = synthesize_sky(cfg.velocity, cfg.t_rest, cfg.n_samples, cfg.noise_sigma, cfg.seed)?;
        let mut csv = provenance(cfg);
        csv.push_str("nx,ny,nz,temperature_k\n");
        for s in &sky {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                fmt17(s.direction.x),
                fmt17(s.direction.y),
                fmt17(s.direction.z),
                fmt17(s.temperature)
            );
        }
        write_text(path, &csv)?;
    }
    let est = find_null_frame(
        cfg.velocity,
        cfg.t_rest,
        cfg.n_samples,
        cfg.noise_sigma,
        cfg.tolerance,
        cfg.seed,
    )?;
    let recovered = -est.beta;
    let mut report = provenance(cfg);
    let _ = writeln!(
        report,
        "true_beta {} {} {}",
        fmt17(cfg.velocity.x),
        fmt17(cfg.velocity.y),
        fmt17(cfg.velocity.z)
    );
    let _ = writeln!(
        report,
        "recovered_beta {} {} {}",
        fmt17(recovered.x),
        fmt17(recovered.y),
        fmt17(recovered.z)
    );
    let _ = writeln!(report, "recovered_speed_km_s {}", fmt17(est.speed_km_s()));
    let _ = writeln!(report, "iterations {}", est.iterations);
    let _ = writeln!(report, "final_dipole_ratio {}", fmt17(est.final_dipole_ratio));
    let ratios: Vec<String> = est.ratio_history.iter().map(|&r| fmt17(r)).collect();
    let _ = writeln!(report, "dipole_ratio_history {}", ratios.join(" "));
    write_text(output_path(cfg), &report)?;
    Ok(format!(
        "mbr-find: recovered {:.3} km/s in {} iterations (final dipole ratio {:e})",
        est.speed_km_s(),
        est.iterations,
        est.final_dipole_ratio
    ))
}
