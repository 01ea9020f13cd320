//! Figure sweeps: grids from TOML configs, points computed in parallel,
//! tables assembled in grid order.

use rayon::prelude::*;
use serde::Deserialize;

use freecomp::figures::{self as fig, CoherenceRow};
use freecomp::{Error, Result};

use crate::format::{bound_cell, g12, Table};
use crate::svg::{PlotStyle, Series};

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::Domain("grid needs at least one point".into()));
        }
        if self.scale == Scale::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(Error::Domain("log grid bounds must be positive".into()));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|k| {
                let t = k as f64 / n;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * t,
                    Scale::Log => {
                        let (a, b) = (self.start.log10(), self.stop.log10());
                        10f64.powf(a + (b - a) * t)
                    }
                }
            })
            .collect())
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
pub struct FigureConfig {
    pub grid: Grid,
    /// Noise rates, one curve each (T-count figure only).
    #[serde(default)]
    pub mu: Vec<f64>,
}

impl FigureConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("figure config: {e}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    Fig2a,
    Fig2b,
    Fig4a,
    Fig4b,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig4a => "fig4a",
            Figure::Fig4b => "fig4b",
        }
    }

    /// The checked-in sweep configuration.
    pub fn default_config(self) -> &'static str {
        match self {
            Figure::Fig2a => include_str!("../configs/fig2a.toml"),
            Figure::Fig2b => include_str!("../configs/fig2b.toml"),
            Figure::Fig4a => include_str!("../configs/fig4a.toml"),
            Figure::Fig4b => include_str!("../configs/fig4b.toml"),
        }
    }
}

/// A computed figure: the table plus how to draw it.
pub struct FigureData {
    pub table: Table,
    pub series: Vec<Series>,
    pub style: PlotStyle,
}

fn par_map<T: Send>(xs: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    xs.par_iter().map(|&x| f(x)).collect::<Vec<_>>().into_iter().collect()
}

fn coherence_figure(var: &str, rows: Vec<CoherenceRow>, title: &str) -> FigureData {
    let mut table = Table::new([var, "sdp_optimal_error", "gamma_bound", "lmin_bound"]);
    for r in &rows {
        table.push(vec![g12(r.x), g12(r.sdp_optimal_error), g12(r.gamma_bound), g12(r.lmin_bound)]);
    }
    let pick = |f: fn(&CoherenceRow) -> f64| rows.iter().map(|r| (r.x, f(r))).collect::<Vec<_>>();
    let series = vec![
        Series::new("optimal MIO error", pick(|r| r.sdp_optimal_error)),
        Series::new("free component bound", pick(|r| r.gamma_bound)),
        Series::new("min-eigenvalue bound", pick(|r| r.lmin_bound)),
    ];
    let style = PlotStyle { title: title.into(), x_label: var.into(), y_label: "error".into(), log_x: false };
    FigureData { table, series, style }
}

pub fn compute(figure: Figure, cfg: &FigureConfig) -> Result<FigureData> {
    let xs = cfg.grid.values()?;
    Ok(match figure {
        Figure::Fig2a => {
            coherence_figure("mu", par_map(&xs, fig::depolarized_plus_row)?, "Depolarized |+>, coherence distillation")
        }
        Figure::Fig2b => {
            coherence_figure("nu", par_map(&xs, fig::amp_damped_plus_row)?, "Amplitude-damped |+>, coherence distillation")
        }
        Figure::Fig4a => {
            let gammas = par_map(&xs, fig::noisy_t_gamma)?;
            let mut table = Table::new(["mu", "gamma"]);
            for (x, g) in xs.iter().zip(&gammas) {
                table.push(vec![g12(*x), g12(*g)]);
            }
            let series = vec![Series::new("Gamma of noisy T", xs.iter().copied().zip(gammas).collect())];
            let style = PlotStyle {
                title: "Free component of depolarized T over the Clifford hull".into(),
                x_label: "mu".into(),
                y_label: "Gamma".into(),
                log_x: false,
            };
            FigureData { table, series, style }
        }
        Figure::Fig4b => {
            if cfg.mu.is_empty() {
                return Err(Error::Parse("fig4b config needs a `mu` list".into()));
            }
            let gammas = par_map(&cfg.mu, fig::noisy_t_gamma)?;
            let mut header = vec!["eps".to_string()];
            header.extend(cfg.mu.iter().map(|m| format!("count_mu_{}", g12(*m))));
            let mut table = Table::new(header);
            let mut curves: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.mu.len()];
            for &eps in &xs {
                let counts = fig::noisy_t_count_row(eps, &gammas)?;
                let mut row = vec![g12(eps)];
                for (k, c) in counts.iter().enumerate() {
                    row.push(bound_cell(*c));
                    if let Some(v) = c.finite() {
                        curves[k].push((eps, v));
                    }
                }
                table.push(row);
            }
            let series = cfg.mu.iter().zip(curves).map(|(m, pts)| Series::new(format!("mu = {}", g12(*m)), pts)).collect();
            let style = PlotStyle {
                title: "Noisy T gates for one CCZ".into(),
                x_label: "diamond error eps".into(),
                y_label: "gate count lower bound".into(),
                log_x: true,
            };
            FigureData { table, series, style }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = Grid { start: 0.0, stop: 1.0, points: 5, scale: Scale::Linear };
        assert_eq!(g.values().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = Grid { start: 1e-3, stop: 1e-1, points: 3, scale: Scale::Log };
        let v = g.values().unwrap();
        assert!((v[1] - 1e-2).abs() < 1e-15);
        assert!(Grid { start: 0.0, stop: 1.0, points: 3, scale: Scale::Log }.values().is_err());
        assert!(Grid { start: 0.0, stop: 1.0, points: 0, scale: Scale::Linear }.values().is_err());
    }

    #[test]
    fn shipped_configs_parse() {
        for f in [Figure::Fig2a, Figure::Fig2b, Figure::Fig4a, Figure::Fig4b] {
            let cfg = FigureConfig::parse(f.default_config()).unwrap();
            assert!(cfg.grid.values().unwrap().len() > 10);
        }
        assert_eq!(FigureConfig::parse(Figure::Fig4b.default_config()).unwrap().mu.len(), 4);
        assert!(matches!(FigureConfig::parse("grid = 3"), Err(Error::Parse(_))));
    }
}
