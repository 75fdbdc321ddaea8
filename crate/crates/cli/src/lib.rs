//! Run configuration, output files and table summaries for the `blowup` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use blowup_core::certify::{certify_blowup_traced, BlowupCertificate, CertifiedRun, CertifyOptions};
use blowup_core::error::Error as CoreError;
use blowup_core::integrator::{EnclosureStep, IntegratorOptions};
use blowup_core::interval::Interval;
use blowup_core::model::{decompactify, initial_data, InitialKind, ProblemParams};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::Parameter(_) | CoreError::Input(_) | CoreError::Domain(_) => 2,
                CoreError::ValidationFailure(_) => 3,
                CoreError::ReframeNeeded { .. } => 4,
                CoreError::BudgetExhausted { .. } | CoreError::StepFailure { .. } => 5,
                _ => 1,
            },
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Initial profile selector: `cosine_m1`, `cosine_m2` or `file:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialChoice {
    CosineM1,
    CosineM2,
    File(PathBuf),
}

impl FromStr for InitialChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine_m1" => Ok(InitialChoice::CosineM1),
            "cosine_m2" => Ok(InitialChoice::CosineM2),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(InitialChoice::File(PathBuf::from(path))),
                _ => Err(CliError::Config(format!(
                    "unknown initial data '{s}', expected cosine_m1, cosine_m2 or file:<path>"
                ))),
            },
        }
    }
}

impl InitialChoice {
    /// The profile conventionally paired with `m`.
    pub fn default_for(m: u32) -> Self {
        if m == 1 {
            InitialChoice::CosineM1
        } else {
            InitialChoice::CosineM2
        }
    }

    fn kind(&self) -> InitialKind {
        match self {
            InitialChoice::CosineM1 => InitialKind::CosineM1,
            InitialChoice::CosineM2 => InitialKind::CosineM2,
            InitialChoice::File(p) => InitialKind::File(p.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Emit {
    Json,
    Csv,
    Surface,
}

/// Parses a comma list such as `json,csv`.
pub fn parse_emit(s: &str) -> Result<Vec<Emit>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let e = match item {
            "json" => Emit::Json,
            "csv" => Emit::Csv,
            "surface" => Emit::Surface,
            other => return Err(CliError::Config(format!("unknown output format '{other}'"))),
        };
        if !out.contains(&e) {
            out.push(e);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub m: u32,
    /// Decimal text, enclosed by an interval at most one ulp wide on each side.
    pub lambda: String,
    pub initial: InitialChoice,
    pub order: usize,
    pub h0: f64,
    pub hmin: f64,
    pub max_steps: usize,
    pub epsilon_target: Option<f64>,
    pub out_dir: PathBuf,
    pub emit: Vec<Emit>,
}

impl RunConfig {
    pub fn new(n: usize, m: u32) -> Self {
        let defaults = IntegratorOptions::default();
        RunConfig {
            n,
            m,
            lambda: "1".into(),
            initial: InitialChoice::default_for(m),
            order: defaults.order,
            h0: defaults.h0,
            hmin: defaults.hmin,
            max_steps: defaults.max_steps,
            epsilon_target: None,
            out_dir: PathBuf::from("."),
            emit: vec![Emit::Json, Emit::Csv],
        }
    }

    pub fn params(&self) -> Result<ProblemParams> {
        let lambda = Interval::from_decimal(self.lambda.trim())
            .map_err(|e| CliError::Config(format!("lambda '{}': {e}", self.lambda)))?;
        Ok(ProblemParams::new(self.n, self.m, lambda)?)
    }

    pub fn certify_options(&self) -> Result<CertifyOptions> {
        let integrator = IntegratorOptions {
            order: self.order,
            h0: self.h0,
            hmin: self.hmin,
            max_steps: self.max_steps,
            ..Default::default()
        };
        integrator.validate()?;
        let mut opts = CertifyOptions {
            integrator,
            ..Default::default()
        };
        if let Some(t) = self.epsilon_target {
            if !(t > 0.0 && t <= 1.0) {
                return Err(CliError::Config(format!("epsilon target must lie in (0, 1], got {t}")));
            }
            opts.epsilon_target = t;
        }
        Ok(opts)
    }

    fn stem(&self) -> String {
        format!("n{}_m{}", self.n, self.m)
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| CliError::Config(format!("invalid value '{value}' for {key}")))
        }
        match key {
            "n" => self.n = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "lambda" => self.lambda = value.to_string(),
            "initial" => self.initial = value.parse()?,
            "order" => self.order = num(key, value)?,
            "h0" => self.h0 = num(key, value)?,
            "hmin" => self.hmin = num(key, value)?,
            "max_steps" | "max-steps" => self.max_steps = num(key, value)?,
            "epsilon_target" | "epsilon-target" => self.epsilon_target = Some(num(key, value)?),
            "out_dir" | "out-dir" => self.out_dir = PathBuf::from(value),
            "emit" => self.emit = parse_emit(value)?,
            other => return Err(CliError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }
}

/// One config per non-empty line of `key=value` pairs, applied on top of `base`.
/// The initial profile follows `m` unless a line sets it.
pub fn parse_sweep(text: &str, base: &RunConfig) -> Vec<(String, Result<RunConfig>)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            let parsed = (|| {
                let mut cfg = base.clone();
                let mut initial_set = false;
                for pair in line.split_whitespace() {
                    let (k, v) = pair
                        .split_once('=')
                        .ok_or_else(|| CliError::Config(format!("expected key=value, got '{pair}'")))?;
                    cfg.set(k, v)?;
                    initial_set |= k == "initial";
                }
                if !initial_set {
                    cfg.initial = InitialChoice::default_for(cfg.m);
                }
                Ok(cfg)
            })();
            (line.to_string(), parsed)
        })
        .collect()
}

/// Outcome of one run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub certificate: BlowupCertificate,
    pub files: Vec<PathBuf>,
}

pub const SUMMARY_HEADER: &str = "N | ε | τ̄ | t_max | exec time";

pub fn summary_row(c: &BlowupCertificate) -> String {
    format!(
        "{} | {:.3e} | {:.4} | [{:?}, {:?}] | {:.2} s",
        c.n,
        c.epsilon,
        c.tau_bar,
        c.t_max.lo(),
        c.t_max.hi(),
        c.wall_time_sec
    )
}

/// Certifies one configuration and writes the requested files.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let p = cfg.params()?;
    let opts = cfg.certify_options()?;
    let u0 = initial_data(&cfg.initial.kind(), &p)?;
    let certified = certify_blowup_traced(&p, &u0, &opts)?;
    let files = write_outputs(cfg, &p, &certified)?;
    Ok(RunReport {
        certificate: certified.certificate,
        files,
    })
}

fn write_outputs(cfg: &RunConfig, p: &ProblemParams, run: &CertifiedRun) -> Result<Vec<PathBuf>> {
    if cfg.emit.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(&cfg.out_dir)?;
    let mut files = Vec::new();
    for e in &cfg.emit {
        let path = match e {
            Emit::Json => {
                let path = cfg.out_dir.join(format!("certificate_{}.json", cfg.stem()));
                fs::write(&path, run.certificate.to_json()?)?;
                path
            }
            Emit::Csv => {
                let path = cfg.out_dir.join(format!("trajectory_{}.csv", cfg.stem()));
                write_trajectory(&path, p, &run.trajectory)?;
                path
            }
            Emit::Surface => {
                let path = cfg.out_dir.join(format!("surface_{}.csv", cfg.stem()));
                write_surface(&path, p, &run.trajectory)?;
                path
            }
        };
        files.push(path);
    }
    Ok(files)
}

/// Header of the trajectory CSV.
pub fn trajectory_header(p: &ProblemParams) -> Vec<String> {
    let mut h: Vec<String> = ["tau_lo", "tau_hi", "t_lo", "t_hi", "s_lo", "s_hi"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for i in (1..p.n()).filter(|&i| i != p.center()) {
        h.push(format!("x_{i}_lo"));
        h.push(format!("x_{i}_hi"));
    }
    h
}

pub fn write_trajectory(path: &Path, p: &ProblemParams, steps: &[EnclosureStep]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(trajectory_header(p))?;
    for st in steps {
        let mut row = vec![st.tau, st.state.t, st.state.c.s];
        row.extend(st.state.c.x.iter().copied());
        w.write_record(row.iter().flat_map(|iv| [iv.lo().to_string(), iv.hi().to_string()]))?;
    }
    w.flush()?;
    Ok(())
}

/// Rows `(t_mid, y_i, u_i_mid)` over the grid for every step with `s > 0`.
pub fn write_surface(path: &Path, p: &ProblemParams, steps: &[EnclosureStep]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_mid", "y", "u_mid"])?;
    for st in steps.iter().filter(|st| st.state.c.s.lo() > 0.0) {
        let u = decompactify(p, &st.state.c)?;
        let t = st.state.t.mid().to_string();
        for i in 0..=p.n() {
            let y = i as f64 / p.n() as f64;
            w.write_record([t.clone(), y.to_string(), u.at(i).mid().to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Result of a sweep.
#[derive(Debug)]
pub struct SweepOutcome {
    pub table: String,
    pub exit_code: i32,
    pub reports: Vec<(String, Result<RunReport>)>,
}

/// Runs every configuration on its own thread and assembles a table sorted by `n`.
pub fn table_sweep(configs: Vec<(String, Result<RunConfig>)>) -> SweepOutcome {
    if configs.is_empty() {
        return SweepOutcome {
            table: "empty sweep\n".into(),
            exit_code: 2,
            reports: Vec::new(),
        };
    }
    let mut reports: Vec<(String, Option<(usize, u32)>, Result<RunReport>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .into_iter()
            .map(|(label, cfg)| {
                scope.spawn(move || {
                    let key = cfg.as_ref().ok().map(|c| (c.n, c.m));
                    (label, key, cfg.and_then(|c| run(&c)))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    reports.sort_by_key(|(_, key, _)| key.unwrap_or((usize::MAX, u32::MAX)));

    let mut table = format!("{SUMMARY_HEADER}\n");
    let mut exit_code = 0;
    for (label, _, r) in &reports {
        match r {
            Ok(rep) => writeln!(table, "{}", summary_row(&rep.certificate)).unwrap(),
            Err(e) => {
                writeln!(table, "FAILED | {label} | {e}").unwrap();
                exit_code = 1;
            }
        }
    }
    SweepOutcome {
        table,
        exit_code,
        reports: reports.into_iter().map(|(l, _, r)| (l, r)).collect(),
    }
}
