//! Command-line front end.
//!
//! Every command reads an optional flat `key = value` config file and then
//! applies command-line flags on top. Keys are the long flag names without
//! the leading dashes. Outputs are plain CSV (one header line, LF endings,
//! floats with 17 significant digits) and pretty-printed JSON.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::airy::{edge_scale, extract_staircase, measure_edge_in, predict_edge, EdgeProfile, XI_LIMIT};
use crate::dispersion::WalkParams;
use crate::error::WalkError;
use crate::evolve::{
    cumulative, cumulative_moment, current_density, evolve, position_moment, probability_density,
    skewness, Lattice,
};
use crate::fronts::{critical_coupling, find_extremal_fronts_with, ExtremalFront, FrontOptions};
use crate::hydro::{bulk_rows, front_windows, report_from_rows, scaling_curve, VelocityProfile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error(transparent)]
    Numerical(#[from] WalkError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Numerical(WalkError::InvalidParameter { .. }) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    fn config(field: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "chiral-walk", version, about = "Quantum walk with complex next-nearest-neighbour hopping")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve from a single site; write densities, cumulatives and moments.
    Evolve(EvolveArgs),
    /// Sweep the coupling and list extremal fronts and critical couplings.
    Fronts(FrontsArgs),
    /// Compare numeric cumulative distributions with the hydrodynamic curves.
    Scaling(ScalingArgs),
    /// Edge profile and staircase near one extremal front.
    Edge(EdgeArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Next-nearest-neighbour coupling strength (>= 0).
    #[arg(long)]
    pub g: Option<f64>,
    /// Phase of the next-nearest-neighbour hop.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Evolution time.
    #[arg(long)]
    pub t: Option<f64>,
    /// Number of lattice sites (default: sized from the light cone).
    #[arg(long)]
    pub lattice: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Largest |omega''| accepted at a front (default 1e-10)
    #[arg(long = "tol-root")]
    pub tol_root: Option<f64>,
    /// Derivatives below this count as vanishing when ordering fronts (default 1e-8)
    #[arg(long = "tol-order")]
    pub tol_order: Option<f64>,
    /// Velocity gap below which fronts are degenerate (default 1e-9)
    #[arg(long = "tol-degen")]
    pub tol_degen: Option<f64>,
    /// Bisection tolerance for critical couplings (default 1e-10)
    #[arg(long = "tol-g")]
    pub tol_g: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FrontsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "g-min")]
    pub g_min: Option<f64>,
    #[arg(long = "g-max")]
    pub g_max: Option<f64>,
    #[arg(long = "g-steps")]
    pub g_steps: Option<usize>,
    /// Comma-separated phases; overrides --phi.
    #[arg(long)]
    pub phis: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated evolution times; overrides --t.
    #[arg(long)]
    pub times: Option<String>,
    /// Exclusion window constant c in c (|kappa| t)^{1/(k+2)}.
    #[arg(long)]
    pub exclusion: Option<f64>,
    /// Write every stride-th site to bulk.csv.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Samples of the hydrodynamic grid in hydro.csv.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EdgeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Which front: left, right or internal.
    #[arg(long)]
    pub front: Option<String>,
    /// Half-width of the measured window in sites.
    #[arg(long)]
    pub window: Option<usize>,
}

/// Merged configuration: flags first, then the config file.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    file: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "g", "phi", "t", "lattice", "out", "jobs", "tol-root", "tol-order", "tol-degen", "tol-g",
    "g-min", "g-max", "g-steps", "phis", "times", "exclusion", "stride", "points", "front", "window",
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::config("config", format!("line {}: expected `key = value`", i + 1))
            })?;
            let key = k.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::config(&key, format!("unknown key on line {}", i + 1)));
            }
            file.insert(key, v.trim().to_string());
        }
        Ok(Self { file })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::config("config", format!("{}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    /// Flag value if given, else the file value parsed as `T`.
    pub fn pick<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| CliError::config(key, format!("cannot parse `{s}`: {e}")))
            })
            .transpose()
    }
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<f64>()
                .map_err(|e| CliError::config(key, format!("cannot parse `{x}`: {e}")))
        })
        .collect()
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(key, format!("{v} must be positive and finite")))
    }
}

/// Settings shared by every command after merging and validation.
#[derive(Debug, Clone)]
struct Common {
    g: f64,
    phi: f64,
    t: f64,
    lattice: Lattice,
    out: PathBuf,
    opts: FrontOptions,
    tol_g: f64,
}

impl Common {
    fn params(&self) -> Result<WalkParams, CliError> {
        Ok(WalkParams::new(self.g, self.phi)?)
    }
}

fn resolve_common(a: &CommonArgs, cfg: &RunConfig) -> Result<Common, CliError> {
    let defaults = FrontOptions::default();
    let g = cfg.pick("g", a.g)?.unwrap_or(0.0);
    if !g.is_finite() || g < 0.0 {
        return Err(CliError::config("g", format!("{g} must be finite and >= 0")));
    }
    let phi = cfg.pick("phi", a.phi)?.unwrap_or(FRAC_PI_2);
    if !phi.is_finite() {
        return Err(CliError::config("phi", format!("{phi} is not finite")));
    }
    let t = cfg.pick("t", a.t)?.unwrap_or(50.0);
    if !t.is_finite() || t < 0.0 {
        return Err(CliError::config("t", format!("{t} must be finite and >= 0")));
    }
    let lattice = match cfg.pick("lattice", a.lattice)? {
        Some(l) if l < 4 || l % 2 != 0 => {
            return Err(CliError::config("lattice", format!("{l}; need an even size >= 4")))
        }
        Some(l) => Lattice::Sites(l),
        None => Lattice::Auto,
    };
    let opts = FrontOptions {
        tol_root: positive("tol-root", cfg.pick("tol-root", a.tol_root)?.unwrap_or(defaults.tol_root))?,
        tol_order: positive("tol-order", cfg.pick("tol-order", a.tol_order)?.unwrap_or(defaults.tol_order))?,
        tol_degen: positive("tol-degen", cfg.pick("tol-degen", a.tol_degen)?.unwrap_or(defaults.tol_degen))?,
    };
    Ok(Common {
        g,
        phi,
        t,
        lattice,
        out: cfg.pick("out", a.out.clone())?.unwrap_or_else(|| PathBuf::from(".")),
        opts,
        tol_g: positive("tol-g", cfg.pick("tol-g", a.tol_g)?.unwrap_or(1e-10))?,
    })
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::config("out", format!("{}: {e}", dir.display())))
}

/// Float formatting used in every CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })?;
    write_file(path, &bytes)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_file(path, s.as_bytes())
}

fn front_json(f: &ExtremalFront, t: f64) -> serde_json::Value {
    json!({
        "q_star": f.q_star,
        "velocity": f.velocity,
        "order": f.order,
        "kappa": f.kappa,
        "chirality": f.chirality,
        "position": f.velocity * t,
    })
}

fn finite_or_null(x: Option<f64>) -> serde_json::Value {
    match x {
        Some(v) if v.is_finite() => json!(v),
        _ => serde_json::Value::Null,
    }
}

pub fn cmd_evolve(args: &EvolveArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let c = resolve_common(&args.common, cfg)?;
    let p = c.params()?;
    prepare_out(&c.out)?;
    let wf = evolve(&p, c.t, c.lattice)?;
    let density = probability_density(&wf);
    let current = current_density(&wf)?;
    let phi = cumulative(&density)?;
    let jc = cumulative(&current)?;
    let m: Vec<_> = (1..=3)
        .map(|k| cumulative_moment(&density, k))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<String>> = (0..density.values.len())
        .map(|i| {
            let mut r = vec![(density.first_site + i as i64).to_string()];
            for v in [
                density.values[i],
                current.values[i],
                phi.values[i],
                jc.values[i],
                m[0].values[i],
                m[1].values[i],
                m[2].values[i],
            ] {
                r.push(fmt_f64(v));
            }
            r
        })
        .collect();
    write_csv(
        &c.out.join("density.csv"),
        &["n", "p", "j", "Phi", "J", "M1", "M2", "M3"],
        &rows,
    )?;

    let mu: Vec<f64> = (0..=4)
        .map(|k| position_moment(&density, k))
        .collect::<Result<_, _>>()?;
    let d = find_extremal_fronts_with(&p, &c.opts)?;
    let (g, t, s) = (p.g(), c.t, p.phi().sin());
    let summary = json!({
        "params": { "g": p.g(), "phi": p.phi() },
        "t": t,
        "lattice_sites": wf.len(),
        "mu": mu,
        "gamma": finite_or_null(skewness(&density).ok()),
        "predicted": {
            "mu2": 2.0 * (1.0 + 4.0 * g * g) * t * t,
            "mu3": 12.0 * g * t.powi(3) * s,
            "mu4": 6.0 * (1.0 + 16.0 * g * g + 16.0 * g.powi(4)) * t.powi(4)
                + 2.0 * (1.0 + 16.0 * g * g) * t * t,
            "gamma": 3.0 * 2f64.sqrt() * g * s / (1.0 + 4.0 * g * g).powf(1.5),
        },
        "v_lm": d.v_lm,
        "v_rm": d.v_rm,
        "topology": d.topology,
        "fronts": d.fronts.iter().map(|f| front_json(f, t)).collect::<Vec<_>>(),
    });
    write_json(&c.out.join("summary.json"), &summary)
}

pub fn cmd_fronts(args: &FrontsArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let c = resolve_common(&args.common, cfg)?;
    let phis = match cfg.pick("phis", args.phis.clone())? {
        Some(s) => parse_list("phis", &s)?,
        None => vec![c.phi],
    };
    if phis.is_empty() || phis.iter().any(|p| !p.is_finite()) {
        return Err(CliError::config("phis", "need at least one finite phase"));
    }
    let g_min = cfg.pick("g-min", args.g_min)?.unwrap_or(0.0);
    let g_max = cfg.pick("g-max", args.g_max)?.unwrap_or(0.5);
    let steps = cfg.pick("g-steps", args.g_steps)?.unwrap_or(101);
    if !(g_min.is_finite() && g_max.is_finite()) || g_min < 0.0 {
        return Err(CliError::config("g-min", format!("range [{g_min}, {g_max}] is invalid")));
    }
    if steps == 0 || g_max < g_min || (steps > 1 && g_max == g_min) {
        return Err(CliError::config(
            "g-steps",
            format!("empty coupling range: {steps} steps over [{g_min}, {g_max}]"),
        ));
    }
    prepare_out(&c.out)?;
    let gs: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                g_min
            } else {
                g_min + (g_max - g_min) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let points: Vec<(f64, f64)> = phis
        .iter()
        .flat_map(|&phi| gs.iter().map(move |&g| (phi, g)))
        .collect();
    let opts = c.opts;
    let blocks: Vec<Vec<Vec<String>>> = points
        .par_iter()
        .map(|&(phi, g)| {
            let head = vec![fmt_f64(phi), fmt_f64(g)];
            let result = WalkParams::new(g, phi).and_then(|p| find_extremal_fronts_with(&p, &opts));
            match result {
                Ok(d) => d
                    .fronts
                    .iter()
                    .map(|f| {
                        let mut r = head.clone();
                        r.extend([
                            d.fronts.len().to_string(),
                            d.topology.name().to_string(),
                            fmt_f64(f.q_star),
                            fmt_f64(f.velocity),
                            f.order.to_string(),
                            fmt_f64(f.kappa),
                            String::new(),
                        ]);
                        r
                    })
                    .collect(),
                Err(e) => {
                    let mut r = head;
                    r.extend(["0", "", "", "", "", ""].map(String::from));
                    r.push(e.to_string());
                    vec![r]
                }
            }
        })
        .collect();
    let rows: Vec<Vec<String>> = blocks.into_iter().flatten().collect();
    write_csv(
        &c.out.join("fronts.csv"),
        &["phi", "g", "front_count", "topology", "q_star", "velocity", "order", "kappa", "error"],
        &rows,
    )?;

    let tol_g = c.tol_g;
    let gc: Vec<serde_json::Value> = phis
        .par_iter()
        .map(|&phi| match critical_coupling(phi, tol_g) {
            Ok(g) => json!({ "phi": phi, "g_c": g }),
            Err(e) => json!({ "phi": phi, "g_c": null, "error": e.to_string() }),
        })
        .collect();
    write_json(
        &c.out.join("gc.json"),
        &json!({ "tol_g": tol_g, "critical_couplings": gc }),
    )
}

pub fn cmd_scaling(args: &ScalingArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let c = resolve_common(&args.common, cfg)?;
    let p = c.params()?;
    let times = match cfg.pick("times", args.times.clone())? {
        Some(s) => parse_list("times", &s)?,
        None => vec![c.t],
    };
    if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(CliError::config("times", "need at least one positive time"));
    }
    let exclusion = positive("exclusion", cfg.pick("exclusion", args.exclusion)?.unwrap_or(8.0))?;
    let stride = cfg.pick("stride", args.stride)?.unwrap_or(1);
    if stride == 0 {
        return Err(CliError::config("stride", "must be at least 1"));
    }
    let points = cfg.pick("points", args.points)?.unwrap_or(4001);
    if points < 2 {
        return Err(CliError::config("points", "need at least 2"));
    }
    prepare_out(&c.out)?;

    let curve = scaling_curve(&p, points, 0.5)?;
    let hydro_rows: Vec<Vec<String>> = (0..curve.nu.len())
        .map(|i| {
            [
                curve.nu[i],
                curve.phi_scaled[i],
                curve.j_scaled[i],
                curve.m_scaled[0][i],
                curve.m_scaled[1][i],
                curve.m_scaled[2][i],
            ]
            .map(fmt_f64)
            .to_vec()
        })
        .collect();
    write_csv(
        &c.out.join("hydro.csv"),
        &["nu", "Phi", "J", "M1", "M2", "M3"],
        &hydro_rows,
    )?;

    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &t in &times {
        let (bulk, d) = bulk_rows(&p, t, exclusion)?;
        let windows = front_windows(&d, t, exclusion);
        let pad = 2.0 * windows.iter().map(|w| w.half_width).fold(0.0, f64::max) + 20.0;
        let (lo, hi) = (d.v_lm * t - pad, d.v_rm * t + pad);
        for r in bulk.iter().filter(|r| {
            (r.n as f64) >= lo && (r.n as f64) <= hi && r.n.rem_euclid(stride as i64) == 0
        }) {
            let mut row = vec![fmt_f64(t), r.n.to_string()];
            for v in [
                r.nu,
                r.phi_num,
                r.phi_hydro,
                r.j_num,
                r.j_hydro,
                r.m_num[0],
                r.m_hydro[0],
                r.m_num[1],
                r.m_hydro[1],
                r.m_num[2],
                r.m_hydro[2],
            ] {
                row.push(fmt_f64(v));
            }
            row.push(u8::from(r.in_window).to_string());
            rows.push(row);
        }
        reports.push(report_from_rows(&p, t, exclusion, &bulk, &d));
    }
    write_csv(
        &c.out.join("bulk.csv"),
        &[
            "t", "n", "nu", "Phi_num", "Phi_hydro", "J_num", "J_hydro", "M1_num", "M1_hydro",
            "M2_num", "M2_hydro", "M3_num", "M3_hydro", "in_window",
        ],
        &rows,
    )?;
    let vp = VelocityProfile::new(&p)?;
    write_json(
        &c.out.join("bulk_report.json"),
        &json!({
            "params": { "g": p.g(), "phi": p.phi() },
            "half_probability_velocity": vp.half_probability_velocity(),
            "reports": reports,
        }),
    )
}

fn select_front(
    d: &crate::fronts::FrontDiagram,
    which: &str,
) -> Result<Option<ExtremalFront>, CliError> {
    Ok(match which {
        "left" => d.left_fronts().next().copied(),
        "right" => d.right_fronts().next().copied(),
        "internal" => d.internal_fronts().next().copied(),
        other => {
            return Err(CliError::config(
                "front",
                format!("`{other}`; expected left, right or internal"),
            ))
        }
    })
}

pub fn cmd_edge(args: &EdgeArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let mut c = resolve_common(&args.common, cfg)?;
    if args.common.t.is_none() && !cfg.file.contains_key("t") {
        c.t = 1e4;
    }
    let p = c.params()?;
    let which = cfg.pick("front", args.front.clone())?.unwrap_or_else(|| "left".into());
    let d = find_extremal_fronts_with(&p, &c.opts)?;
    let front = select_front(&d, &which)?
        .ok_or_else(|| CliError::config("front", format!("no {which} front for these parameters")))?;
    let t = c.t;
    if t <= 0.0 {
        return Err(CliError::config("t", "edge profiles need t > 0"));
    }
    let scale = edge_scale(&front, t);
    let window = cfg
        .pick("window", args.window)?
        .unwrap_or((14.0 * scale).ceil() as usize);
    prepare_out(&c.out)?;
    let wf = evolve(&p, t, c.lattice)?;
    let numeric = measure_edge_in(&wf, &d, &front, window)?;
    let multiplicity = numeric.multiplicity as f64;

    let mut diagnostics = Vec::new();
    let predicted = if front.order % 2 == 1 {
        let grid: Vec<f64> = numeric.xi.iter().copied().filter(|x| x.abs() <= XI_LIMIT).collect();
        Some(predict_edge(&front, t, &grid)?)
    } else {
        diagnostics.push(WalkError::EvenOrderFront(front.order).to_string());
        None
    };
    let pred_at = |x: f64| -> (f64, f64) {
        match predicted.as_ref().and_then(|pr| pr.dphi_at(x).zip(pr.djs_at(x))) {
            Some((a, b)) => (multiplicity * a, multiplicity * b),
            None => (f64::NAN, f64::NAN),
        }
    };
    let mut sup_dev: f64 = 0.0;
    let rows: Vec<Vec<String>> = (0..numeric.xi.len())
        .map(|i| {
            let x = numeric.xi[i];
            let (pp, pj) = pred_at(x);
            if (0.0..=6.0).contains(&x) && pp.is_finite() {
                sup_dev = sup_dev.max((numeric.dphi_scaled[i] - pp).abs());
            }
            [x, numeric.dphi_scaled[i], pp, numeric.djs_scaled[i], pj]
                .map(fmt_f64)
                .to_vec()
        })
        .collect();
    write_csv(
        &c.out.join("edge.csv"),
        &["xi", "dPhi_scaled_num", "dPhi_scaled_pred", "dJ_scaled_num", "dJ_scaled_pred"],
        &rows,
    )?;

    let mut stair_rows = Vec::new();
    if front.order % 2 == 1 {
        let views: [(&str, EdgeProfile); 2] =
            [("CPD", numeric.clone()), ("CCD", numeric.current_view())];
        for (label, prof) in views {
            let s = extract_staircase(&prof);
            for st in &s.steps {
                stair_rows.push(vec![
                    which.clone(),
                    label.to_string(),
                    st.index.to_string(),
                    fmt_f64(st.height),
                    fmt_f64(st.width),
                    fmt_f64(st.area),
                    fmt_f64(st.area / multiplicity),
                    String::new(),
                ]);
            }
            if let Some(msg) = s.diagnostic {
                diagnostics.push(format!("{label}: {msg}"));
                stair_rows.push(diag_row(&which, label, &msg));
            }
        }
    } else {
        stair_rows.push(diag_row(&which, "CPD", &diagnostics[0]));
    }
    write_csv(
        &c.out.join("staircase.csv"),
        &["front", "profile", "step", "height", "width", "area", "area_per_front", "diagnostic"],
        &stair_rows,
    )?;
    write_json(
        &c.out.join("edge_summary.json"),
        &json!({
            "params": { "g": p.g(), "phi": p.phi() },
            "t": t,
            "front": front_json(&front, t),
            "scaling_exponent": numeric.scaling_exponent(),
            "degeneracy_factor": numeric.multiplicity,
            "length_scale": scale,
            "window": window,
            "beat_period": finite_or_null(numeric.beat_period),
            "sup_deviation_dphi": finite_or_null(predicted.as_ref().map(|_| sup_dev)),
            "diagnostics": diagnostics,
        }),
    )
}

fn diag_row(front: &str, profile: &str, msg: &str) -> Vec<String> {
    vec![
        front.to_string(),
        profile.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        msg.to_string(),
    ]
}

fn common_of(cmd: &Command) -> &CommonArgs {
    match cmd {
        Command::Evolve(a) => &a.common,
        Command::Fronts(a) => &a.common,
        Command::Scaling(a) => &a.common,
        Command::Edge(a) => &a.common,
    }
}

/// Run a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let common = common_of(&cli.command);
    let cfg = RunConfig::load(common.config.as_deref())?;
    let jobs = cfg.pick("jobs", common.jobs)?;
    if jobs == Some(0) {
        return Err(CliError::config("jobs", "must be at least 1"));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::config("jobs", e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Evolve(a) => cmd_evolve(a, &cfg),
        Command::Fronts(a) => cmd_fronts(a, &cfg),
        Command::Scaling(a) => cmd_scaling(a, &cfg),
        Command::Edge(a) => cmd_edge(a, &cfg),
    })
}

/// Parse arguments, run, and map the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
