//! Subcommand pipelines and artifact writing.

use std::path::PathBuf;

use lmg_otto::perturbation::{interference_report, perturbative_work};
use lmg_otto::phase_space::{
    semiclassical_vs_exact_report, squeezed_vacuum_fock, transition_table_exact,
};
use lmg_otto::sweep::{efficiency_extrema, returns_analysis, sweep_cycle};
use lmg_otto::thermo::run_otto_cycle;
use lmg_otto::{Error, SpinSector};
use thiserror::Error as ThisError;

use crate::config::{Command, ConfigError, Format, RunConfig};
use crate::emit::{sweep_to_table, to_csv, to_json, write_file, Cell, EmitError, Table};
use crate::presets;
use crate::svg::{render_chart, AxesSpec, Marker, Series, SvgError};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error(transparent)]
    Svg(#[from] SvgError),
    #[error("preset {preset}: {source}")]
    Preset {
        preset: String,
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Io { .. }) => EXIT_IO,
            CliError::Config(_) => EXIT_USAGE,
            CliError::Core(e) => match e.root() {
                Error::EigensolverFailure { .. }
                | Error::InsufficientData(_)
                | Error::NoEngineOperation => EXIT_NUMERIC,
                _ => EXIT_USAGE,
            },
            CliError::Emit(EmitError::Io { .. }) => EXIT_IO,
            CliError::Emit(_) | CliError::Svg(_) => EXIT_NUMERIC,
            CliError::Preset { source, .. } => source.exit_code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub series: Vec<Series>,
    pub axes: AxesSpec,
}

/// One output table, optionally charted, written as `<name>.<format>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub table: Table,
    pub chart: Option<Chart>,
}

/// File contents keyed by file name, in write order.
pub fn render(cfg: &RunConfig, artifacts: &[Artifact]) -> Result<Vec<(String, String)>, CliError> {
    let meta = cfg.meta();
    let mut out = Vec::new();
    for a in artifacts {
        if cfg.wants(Format::Csv) {
            out.push((format!("{}.csv", a.name), to_csv(&meta, &a.table)));
        }
        if cfg.wants(Format::Json) {
            out.push((format!("{}.json", a.name), to_json(&meta, &a.table)));
        }
        if let (true, Some(chart)) = (cfg.wants(Format::Svg), &a.chart) {
            let comment = serde_json::to_string(&meta).expect("serializable meta");
            out.push((
                format!("{}.svg", a.name),
                render_chart(&chart.series, &chart.axes, &comment)?,
            ));
        }
    }
    Ok(out)
}

pub fn build_artifacts(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    match &cfg.command {
        Command::Cycle => cycle(cfg),
        Command::Sweep => sweep(cfg),
        Command::Interference => interference(cfg),
        Command::Geometry => geometry(cfg),
        Command::Squeezed => squeezed(cfg),
        Command::Figure(p) => {
            presets::build(*p, cfg)
                .map(|a| vec![a])
                .map_err(|e| CliError::Preset {
                    preset: p.id().to_string(),
                    source: Box::new(e.into()),
                })
        }
    }
}

/// Runs the pipeline and writes every requested file; returns their paths.
pub fn execute(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let artifacts = build_artifacts(cfg)?;
    let files = render(cfg, &artifacts)?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|source| EmitError::Io {
        path: cfg.out_dir.clone(),
        source,
    })?;
    let mut paths = Vec::new();
    for (name, contents) in files {
        let path = cfg.out_dir.join(name);
        write_file(&path, &contents)?;
        paths.push(path);
    }
    Ok(paths)
}

fn cycle(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let sector = cfg.sector()?;
    let table_p = transition_table_exact(&sector)?;
    let mut t = Table::new(&[
        "n",
        "mode",
        "u_a",
        "u_b",
        "u_c",
        "u_d",
        "q_in",
        "q_out",
        "w",
        "eta",
        "eta_signed",
        "w_pert_x",
        "w_pert_xy",
        "pert_validity_hint",
        "ordered_regime",
    ]);
    for &mode in &cfg.modes {
        let p = cfg.params.with_mode(mode);
        let r = run_otto_cycle(&sector, &p)?;
        let w = perturbative_work(&sector, &p, &table_p)?;
        t.push(vec![
            r.n.into(),
            mode.as_str().into(),
            r.u_a.into(),
            r.u_b.into(),
            r.u_c.into(),
            r.u_d.into(),
            r.q_in.into(),
            r.q_out.into(),
            r.w.into(),
            r.eta.into(),
            r.eta_signed.into(),
            w.w_x.into(),
            w.w_xy.into(),
            w.validity_hint.into(),
            p.in_ordered_regime().into(),
        ]);
    }
    Ok(vec![Artifact {
        name: "cycle".into(),
        table: t,
        chart: None,
    }])
}

fn sweep(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let t = sweep_cycle(&cfg.params, cfg.n_from, cfg.n_to, &cfg.modes)?;
    let markers = [Marker::Circle, Marker::Triangle];
    let series: Vec<Series> = cfg
        .modes
        .iter()
        .zip(markers)
        .map(|(&m, marker)| {
            let pts = t
                .series(m, |r| r.w)
                .iter()
                .map(|&(n, w)| (n as f64, w))
                .collect();
            Series::new(m.as_str(), pts, marker).with_parity_markers()
        })
        .collect();
    let mut returns = Table::new(&["mode", "n_max", "n_dim", "n_at_max_eta", "max_eta"]);
    for &m in &cfg.modes {
        let Ok(r) = returns_analysis(&t, m) else {
            continue;
        };
        let eta = efficiency_extrema(&t, m).ok();
        returns.push(vec![
            m.as_str().into(),
            r.n_max.into(),
            r.n_dim.map_or(Cell::Missing, Cell::from),
            eta.map_or(Cell::Missing, |e| e.0.into()),
            eta.map(|e| e.1).into(),
        ]);
    }
    Ok(vec![
        Artifact {
            name: "sweep".into(),
            table: sweep_to_table(&t),
            chart: Some(Chart {
                series,
                axes: AxesSpec {
                    title: "Work output vs N".into(),
                    x_label: "N".into(),
                    y_label: "W".into(),
                },
            }),
        },
        Artifact {
            name: "returns".into(),
            table: returns,
            chart: None,
        },
    ])
}

fn interference(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let mut t = Table::new(&[
        "n",
        "mode",
        "w_full",
        "w_gamma_y_zero",
        "baseline",
        "w_plus",
        "w_minus",
        "sign_flip",
        "w_xy_pert",
        "w_x_pert",
        "restricted_band",
    ]);
    let mut base = Vec::new();
    let mut pert = Vec::new();
    for &mode in &cfg.modes {
        let p = cfg.params.with_mode(mode);
        for &n in &cfg.n_list {
            let sector = SpinSector::from_spins(n)?;
            let r = interference_report(&sector, &p).map_err(|e| e.at_size(n))?;
            t.push(vec![
                n.into(),
                mode.as_str().into(),
                r.w_full.into(),
                r.w_gamma_y_zero.into(),
                r.baseline.into(),
                r.w_plus.into(),
                r.w_minus.into(),
                r.sign_flip.into(),
                r.w_xy_pert.into(),
                r.w_x_pert.into(),
                r.restricted_band.into(),
            ]);
            if mode == cfg.modes[0] {
                base.push((n as f64, r.baseline));
                pert.push((n as f64, r.w_xy_pert));
            }
        }
    }
    let series = vec![
        Series::new("baseline protocol", base, Marker::Circle),
        Series::new("first order", pert, Marker::Square),
    ];
    Ok(vec![Artifact {
        name: "interference".into(),
        table: t,
        chart: Some(Chart {
            series,
            axes: AxesSpec {
                title: format!("Interference work, {}", cfg.modes[0]),
                x_label: "N".into(),
                y_label: "W_xy".into(),
            },
        }),
    }])
}

fn geometry(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let sector = cfg.sector()?;
    let labels: Vec<i32> = sector.twice_labels().collect();
    let report = semiclassical_vs_exact_report(&sector, &labels, cfg.grid)?;
    let mut t = Table::new(&[
        "twice_n",
        "twice_m",
        "p_exact",
        "p_semiclassical",
        "a_nm",
        "A_nm",
        "phi",
        "allowed_flag",
    ]);
    let top = sector.twice_s() as i32;
    let (mut exact, mut semi) = (Vec::new(), Vec::new());
    for r in &report.rows {
        t.push(vec![
            r.twice_n.into(),
            r.twice_m.into(),
            r.p_exact.into(),
            r.p_semiclassical.into(),
            r.lobe_area.into(),
            r.lens_area.into(),
            r.phi.into(),
            r.allowed.into(),
        ]);
        if r.twice_m == top {
            exact.push((r.twice_n as f64 / 2.0, r.p_exact));
            semi.push((r.twice_n as f64 / 2.0, r.p_semiclassical));
        }
    }
    let mut diffs = Table::new(&["twice_k", "exact", "semiclassical"]);
    for d in &report.differences {
        diffs.push(vec![
            d.twice_k.into(),
            d.exact.into(),
            d.semiclassical.into(),
        ]);
    }
    Ok(vec![
        Artifact {
            name: "geometry".into(),
            table: t,
            chart: Some(Chart {
                series: vec![
                    Series::new("exact", exact, Marker::Circle),
                    Series::new("semiclassical", semi, Marker::Square),
                ],
                axes: AxesSpec {
                    title: format!("P(n, S) at 2S = {}", sector.twice_s()),
                    x_label: "n".into(),
                    y_label: "P(n, S)".into(),
                },
            }),
        },
        Artifact {
            name: "geometry_top_band".into(),
            table: diffs,
            chart: None,
        },
    ])
}

fn squeezed(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let f = squeezed_vacuum_fock(cfg.squeeze_r, cfg.k_max)?;
    let mut t = Table::new(&["k", "p"]);
    for (k, &p) in f.probs.iter().enumerate() {
        t.push(vec![(k as i64).into(), p.into()]);
    }
    let pts = f
        .probs
        .iter()
        .enumerate()
        .map(|(k, &p)| (k as f64, p))
        .collect();
    Ok(vec![Artifact {
        name: "squeezed".into(),
        table: t,
        chart: Some(Chart {
            series: vec![Series::new(
                &format!("r = {}", cfg.squeeze_r),
                pts,
                Marker::Circle,
            )],
            axes: AxesSpec {
                title: "Squeezed vacuum photon-number distribution".into(),
                x_label: "k".into(),
                y_label: "P(k)".into(),
            },
        }),
    }])
}
