//! One preset per figure, each bound to a fixed pipeline.

use std::str::FromStr;

use lmg_otto::perturbation::energy_validity_hint;
use lmg_otto::phase_space::{
    semiclassical_vs_exact_report, transition_table_exact, QuadratureGrid, SphereAreas,
};
use lmg_otto::sweep::{delta_population_report, sweep_cycle, SweepTable};
use lmg_otto::{Result, ScalingMode, SpinSector};

use crate::config::RunConfig;
use crate::emit::Table;
use crate::run::{Artifact, Chart};
use crate::svg::{AxesSpec, Marker, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig3c,
    FigS3,
    FigS4,
    FigS5,
    FigS6,
}

impl FigurePreset {
    pub const ALL: [FigurePreset; 9] = [
        FigurePreset::Fig2a,
        FigurePreset::Fig2b,
        FigurePreset::Fig3a,
        FigurePreset::Fig3b,
        FigurePreset::Fig3c,
        FigurePreset::FigS3,
        FigurePreset::FigS4,
        FigurePreset::FigS5,
        FigurePreset::FigS6,
    ];

    pub fn id(self) -> &'static str {
        match self {
            FigurePreset::Fig2a => "fig2a",
            FigurePreset::Fig2b => "fig2b",
            FigurePreset::Fig3a => "fig3a",
            FigurePreset::Fig3b => "fig3b",
            FigurePreset::Fig3c => "fig3c",
            FigurePreset::FigS3 => "figS3",
            FigurePreset::FigS4 => "figS4",
            FigurePreset::FigS5 => "figS5",
            FigurePreset::FigS6 => "figS6",
        }
    }
}

impl FromStr for FigurePreset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FigurePreset::ALL
            .into_iter()
            .find(|p| p.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| s.to_string())
    }
}

/// Sizes scanned by the top-band presets.
pub const TOP_BAND_TWICE_S: std::ops::RangeInclusive<u32> = 2..=42;

pub fn build(preset: FigurePreset, cfg: &RunConfig) -> Result<Artifact> {
    match preset {
        FigurePreset::Fig2a => fig2a(cfg),
        FigurePreset::Fig2b => fig2b(cfg),
        FigurePreset::Fig3a => fig3(cfg, preset, "u_b", "U_B", |r| Some(r.u_b)),
        FigurePreset::Fig3b => fig3(cfg, preset, "w", "W", |r| Some(r.w)),
        FigurePreset::Fig3c => fig3(cfg, preset, "eta_signed", "eta", |r| r.eta_signed),
        FigurePreset::FigS3 => fig_s3(cfg),
        FigurePreset::FigS4 => fig_s4(cfg),
        FigurePreset::FigS5 => top_band(cfg, preset),
        FigurePreset::FigS6 => top_band(cfg, preset),
    }
}

fn nonextensive_sweep(cfg: &RunConfig) -> Result<SweepTable> {
    sweep_cycle(
        &cfg.params,
        cfg.n_from,
        cfg.n_to,
        &[ScalingMode::NonExtensive],
    )
}

fn axes(title: &str, x: &str, y: &str) -> AxesSpec {
    AxesSpec {
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
    }
}

fn fig2a(cfg: &RunConfig) -> Result<Artifact> {
    let t = nonextensive_sweep(cfg)?;
    let mut table = Table::new(&["n", "parity", "u_b_exact", "u_b_pert", "pert_validity_hint"]);
    for r in t.rows_for(ScalingMode::NonExtensive) {
        let hint = energy_validity_hint(&SpinSector::from_spins(r.n)?);
        table.push(vec![
            r.n.into(),
            r.parity.into(),
            r.u_b.into(),
            r.u_b_pert.into(),
            hint.into(),
        ]);
    }
    let mode = ScalingMode::NonExtensive;
    let series = vec![
        Series::new(
            "exact",
            t.series(mode, |r| r.u_b)
                .iter()
                .map(|&(n, v)| (n as f64, v))
                .collect(),
            Marker::Circle,
        )
        .with_parity_markers(),
        Series::new(
            "perturbative",
            t.series(mode, |r| r.u_b_pert)
                .iter()
                .map(|&(n, v)| (n as f64, v))
                .collect(),
            Marker::Square,
        )
        .with_parity_markers(),
    ];
    Ok(Artifact {
        name: "fig2a".into(),
        table,
        chart: Some(Chart {
            series,
            axes: axes("Internal energy at B, non-extensive", "N", "U_B"),
        }),
    })
}

fn points(
    t: &SweepTable,
    mode: ScalingMode,
    f: impl Fn(&lmg_otto::sweep::SweepRow) -> Option<f64>,
) -> Vec<(f64, f64)> {
    t.rows_for(mode)
        .filter_map(|r| f(r).map(|v| (r.n as f64, v)))
        .collect()
}

fn fig2b(cfg: &RunConfig) -> Result<Artifact> {
    let t = nonextensive_sweep(cfg)?;
    let mut table = Table::new(&[
        "n",
        "parity",
        "w",
        "w_per_n",
        "w_pert_x",
        "w_pert_xy",
        "w_pert_total",
    ]);
    for r in t.rows_for(ScalingMode::NonExtensive) {
        table.push(vec![
            r.n.into(),
            r.parity.into(),
            r.w.into(),
            (r.w / r.n as f64).into(),
            r.w_pert_x.into(),
            r.w_pert_xy.into(),
            (r.w_pert_x + r.w_pert_xy).into(),
        ]);
    }
    let mode = ScalingMode::NonExtensive;
    let series = vec![
        Series::new("exact", points(&t, mode, |r| Some(r.w)), Marker::Circle).with_parity_markers(),
        Series::new(
            "perturbative",
            points(&t, mode, |r| Some(r.w_pert_x + r.w_pert_xy)),
            Marker::Square,
        )
        .with_parity_markers(),
    ];
    Ok(Artifact {
        name: "fig2b".into(),
        table,
        chart: Some(Chart {
            series,
            axes: axes("Work output, non-extensive", "N", "W"),
        }),
    })
}

fn fig3(
    cfg: &RunConfig,
    preset: FigurePreset,
    column: &str,
    label: &str,
    f: fn(&lmg_otto::sweep::SweepRow) -> Option<f64>,
) -> Result<Artifact> {
    let t = sweep_cycle(&cfg.params, cfg.n_from, cfg.n_to, &ScalingMode::ALL)?;
    let ne = format!("{column}_nonextensive");
    let ex = format!("{column}_extensive");
    let mut table = Table::new(&["n", "parity", &ne, &ex]);
    for r in t.rows_for(ScalingMode::NonExtensive) {
        let e = t
            .row(ScalingMode::Extensive, r.n)
            .expect("both modes swept");
        table.push(vec![r.n.into(), r.parity.into(), f(r).into(), f(e).into()]);
    }
    let series = vec![
        Series::new(
            "non-extensive",
            points(&t, ScalingMode::NonExtensive, f),
            Marker::Circle,
        )
        .with_parity_markers(),
        Series::new(
            "extensive",
            points(&t, ScalingMode::Extensive, f),
            Marker::Triangle,
        )
        .with_parity_markers(),
    ];
    Ok(Artifact {
        name: preset.id().into(),
        table,
        chart: Some(Chart {
            series,
            axes: axes(&format!("{label} vs N, both scalings"), "N", label),
        }),
    })
}

fn fig_s3(cfg: &RunConfig) -> Result<Artifact> {
    let report = delta_population_report(&cfg.params, &[16, 17])?;
    let mut table = Table::new(&["n_spins", "twice_n", "n", "delta_p", "dominant"]);
    let mut series = Vec::new();
    for (row, marker) in report.iter().zip([Marker::Circle, Marker::Square]) {
        let mut pts = Vec::new();
        for (&tn, &d) in row.twice_labels.iter().zip(&row.delta) {
            let n = tn as f64 / 2.0;
            table.push(vec![
                row.n.into(),
                tn.into(),
                n.into(),
                d.into(),
                row.dominant.contains(&tn).into(),
            ]);
            pts.push((n, d));
        }
        let label = if row.n % 2 == 0 {
            format!("S = {}", row.n / 2)
        } else {
            format!("S = {}/2", row.n)
        };
        series.push(Series::new(&label, pts, marker));
    }
    Ok(Artifact {
        name: "figS3".into(),
        table,
        chart: Some(Chart {
            series,
            axes: axes(
                "Population change of unperturbed levels",
                "n",
                "P_n^B - P_n^D",
            ),
        }),
    })
}

fn fig_s4(cfg: &RunConfig) -> Result<Artifact> {
    let mut table = Table::new(&[
        "twice_s",
        "twice_n",
        "twice_m",
        "p_exact",
        "p_semiclassical",
        "a_nm",
        "A_nm",
        "phi",
        "allowed_flag",
    ]);
    let mut series = Vec::new();
    for (twice_s, markers) in [
        (16u32, [Marker::Circle, Marker::Square]),
        (17, [Marker::Triangle, Marker::Square]),
    ] {
        let sector = SpinSector::new(twice_s as i64)?;
        let labels: Vec<i32> = sector.twice_labels().collect();
        let report = semiclassical_vs_exact_report(&sector, &labels, cfg.grid)?;
        let top = twice_s as i32;
        let mut exact = Vec::new();
        let mut semi = Vec::new();
        for r in &report.rows {
            table.push(vec![
                twice_s.into(),
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
        series.push(Series::new(
            &format!("exact, 2S = {twice_s}"),
            exact,
            markers[0],
        ));
        series.push(Series::new(
            &format!("semiclassical, 2S = {twice_s}"),
            semi,
            markers[1],
        ));
    }
    Ok(Artifact {
        name: "figS4".into(),
        table,
        chart: Some(Chart {
            series,
            axes: axes("P(n, S): exact vs semiclassical", "n", "P(n, S)"),
        }),
    })
}

/// One `(n, m = S)` point of the top-band scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopBandPoint {
    pub twice_s: u32,
    pub twice_n: i32,
    pub allowed: bool,
    pub phi: Option<f64>,
    pub p_semiclassical: f64,
    pub p_exact: f64,
}

/// `n ∈ {0, 1}` for integer `S` and `n ∈ {1/2, 3/2}` for half-integer `S`,
/// always with `m = S`.
pub fn top_band_scan(
    twice_s_range: std::ops::RangeInclusive<u32>,
    grid: QuadratureGrid,
) -> Result<Vec<TopBandPoint>> {
    let mut out = Vec::new();
    for twice_s in twice_s_range {
        let sector = SpinSector::new(twice_s as i64)?;
        let areas = SphereAreas::compute(&sector, grid);
        let semi = areas.semiclassical_table();
        let exact = transition_table_exact(&sector)?;
        let top = twice_s as i32;
        let rows: [i32; 2] = if twice_s % 2 == 0 { [0, 2] } else { [1, 3] };
        for tn in rows {
            if sector.index_of(tn).is_none() {
                continue;
            }
            let g = areas.geometry_unchecked(tn, top)?;
            out.push(TopBandPoint {
                twice_s,
                twice_n: tn,
                allowed: g.classically_allowed,
                phi: g.classically_allowed.then_some(g.phi),
                p_semiclassical: semi.get(tn, top)?,
                p_exact: exact.get(tn, top)?,
            });
        }
    }
    Ok(out)
}

fn top_band(cfg: &RunConfig, preset: FigurePreset) -> Result<Artifact> {
    let scan = top_band_scan(TOP_BAND_TWICE_S, cfg.grid)?;
    let mut table = Table::new(&[
        "twice_s",
        "s",
        "twice_n",
        "allowed_flag",
        "phi",
        "p_semiclassical",
        "p_exact",
    ]);
    for p in &scan {
        table.push(vec![
            p.twice_s.into(),
            (p.twice_s as f64 / 2.0).into(),
            p.twice_n.into(),
            p.allowed.into(),
            p.phi.into(),
            p.p_semiclassical.into(),
            p.p_exact.into(),
        ]);
    }
    let names = ["n = 0", "n = 1/2", "n = 1", "n = 3/2"];
    let markers = [
        Marker::Circle,
        Marker::Square,
        Marker::Triangle,
        Marker::Circle,
    ];
    let mut series = Vec::new();
    for tn in 0..4 {
        let pts: Vec<(f64, f64)> = scan
            .iter()
            .filter(|p| p.twice_n == tn && p.allowed)
            .filter_map(|p| {
                let y = match preset {
                    FigurePreset::FigS5 => p.phi?,
                    _ => p.p_semiclassical,
                };
                Some((p.twice_s as f64 / 2.0, y))
            })
            .collect();
        if !pts.is_empty() {
            series.push(Series::new(names[tn as usize], pts, markers[tn as usize]));
        }
    }
    let a = match preset {
        FigurePreset::FigS5 => axes("Interference angle at m = S", "S", "Phi (rad)"),
        _ => axes("Semiclassical P(n, S) vs S", "S", "P_sc(n, S)"),
    };
    Ok(Artifact {
        name: preset.id().into(),
        table,
        chart: Some(Chart { series, axes: a }),
    })
}
