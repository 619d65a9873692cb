//! One driver per experiment. Each returns a report plus optional tables.

use std::f64::consts::PI;

use anyhow::{Context, Result};
use kreinlab::commutators::{classify_growth, sv_size_record, CommutatorFunction, SVGrowthRecord};
use kreinlab::gauge::{bump_panel, scalar_transport, transport, transport_ode, verify_laws};
use kreinlab::gmw::{
    bprime_norm_identities, constant_profile_count, gl_residual, kernel_dimension_probe, zero_mode, GMWConfig, SolitonProfile,
};
use kreinlab::grid::{apply_multiplier, Grid1D};
use kreinlab::krein::{
    oracle_suite, principal_trace_consistency_spectra, pushnitski_transform,
    ssf_constant_fit_spectra, truncation_convergence, witten_model_route, ModelSpectra, SSFProfile, TraceReport, ValueRecord,
};
use kreinlab::matfun::SpectralFunction;
use kreinlab::model::{check_hypothesis, tanh_switch, MatrixPotential};
use kreinlab::pvconv::{arctan_diff_kernel_matrix_case, pv_convolution_matrix, qt_fourier_check};
use kreinlab::{max_abs, re, Complex64};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig};

/// Extra CSV output: one header and string rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: TraceReport,
    pub tables: Vec<Table>,
}

fn f(x: f64) -> String {
    format!("{x}")
}

/// Runs experiments from one config. Experiments share no state.
pub struct Runner {
    cfg: ExperimentConfig,
}

impl Runner {
    pub fn new(cfg: ExperimentConfig) -> Self {
        Self { cfg }
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn run(&self, e: Experiment) -> Result<ExperimentOutput> {
        let out = match e {
            Experiment::Gauge => self.gauge(),
            Experiment::Trace => self.trace(),
            Experiment::Ssf => self.ssf(),
            Experiment::Pushnitski => self.pushnitski(),
            Experiment::Witten => self.witten(),
            Experiment::Gmw => self.gmw(),
            Experiment::Commutator => self.commutator(),
            Experiment::Convergence => self.convergence(),
            Experiment::All => anyhow::bail!("`all` must be expanded before running"),
        };
        out.with_context(|| format!("experiment `{}` failed", e.name()))
    }

    fn grid(&self, e: Experiment) -> Result<Grid1D> {
        Ok(self.cfg.grid_for(e)?)
    }

    fn potential(&self) -> Result<MatrixPotential> {
        Ok(self.cfg.potential()?)
    }

    fn model_spectra(&self, grid: &Grid1D) -> Result<ModelSpectra> {
        Ok(ModelSpectra::new(&self.potential()?, grid)?)
    }

    fn base_inputs(&self, grid: &Grid1D) -> serde_json::Value {
        json!({"grid": {"length": grid.length(), "n": grid.len()}, "potential": self.cfg.potential_spec()})
    }

    fn gauge(&self) -> Result<ExperimentOutput> {
        let grid = self.grid(Experiment::Gauge)?;
        let phi = self.potential()?;
        let psi = transport(&phi, &grid, 0.0)?;
        let laws = verify_laws(&psi, &phi, &grid, self.cfg.seed, 32)?;
        let mut values = vec![
            ValueRecord::new("unitarity", laws.unitarity, 0.0, 1e-8, "unitarity of the gauge transport"),
            ValueRecord::new("cocycle", laws.cocycle, 0.0, 1e-8, "cocycle law of the gauge transport"),
            ValueRecord::new("cocycle_direct", laws.cocycle_direct, 0.0, 1e-8, "cocycle law of the gauge transport"),
            ValueRecord::new("determinant", laws.determinant, 0.0, 1e-8, "determinant law of the gauge transport"),
            ValueRecord::new("det_modulus", laws.det_modulus, 0.0, 1e-8, "determinant law of the gauge transport"),
        ];
        if phi.m() == 1 {
            let a = scalar_transport(&phi, &grid, 0.0)?;
            let b = transport_ode(&phi, &grid, 0.0)?;
            let d = a.matrices.iter().zip(&b.matrices).map(|(x, y)| max_abs(&(x - y))).fold(0.0, f64::max);
            values.push(ValueRecord::new("scalar_vs_ode", d, 0.0, 1e-12, "closed-form scalar transport"));
        }

        let kernel = pv_convolution_matrix(&grid);
        let mut pv = 0.0_f64;
        for v in bump_panel(&grid, 1) {
            let a = kernel.apply(&v);
            let b = apply_multiplier(&grid, |s| re(s.atan()), &v.to_vec());
            let num = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            let den = b.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
            pv = pv.max(num / den);
        }
        values.push(ValueRecord::new("pv_vs_multiplier", pv, 0.0, 1e-3, "p.v. convolution realizes arctan(D)"));

        let fine = Grid1D::new(80.0, 4096)?;
        let window = 0.5;
        let mut table = Table::new("qt", &["t", "s_window", "points", "deviation", "max_real_part"]);
        let checks = [0.5, 0.1, 0.02].iter().map(|&t| qt_fourier_check(t, &fine, window)).collect::<kreinlab::Result<Vec<_>>>()?;
        for c in &checks {
            table.push(vec![f(c.t), f(c.s_window), c.points.to_string(), f(c.deviation), f(c.max_real_part)]);
        }
        let increases = checks.windows(2).filter(|w| !(w[1].deviation < w[0].deviation)).count();
        values.push(ValueRecord::new("qt_non_decreasing_steps", increases as f64, 0.0, 0.0, "Fourier limit of Q_t"));
        values.push(ValueRecord::new("qt_deviation(t=0.02)", checks[2].deviation, 0.0, 2e-2, "Fourier limit of Q_t"));

        let mut inputs = self.base_inputs(&grid);
        inputs["seed"] = json!(self.cfg.seed);
        inputs["qt_grid"] = json!({"length": 80.0, "n": 4096, "s_window": window});
        Ok(ExperimentOutput { report: TraceReport::new("gauge", inputs, values), tables: vec![table] })
    }

    fn trace(&self) -> Result<ExperimentOutput> {
        let grid = self.grid(Experiment::Trace)?;
        let s = self.model_spectra(&grid)?;
        let pred = s.integral_trace / PI;
        let z_list = self.cfg.z_list();
        let mut values = Vec::new();
        let mut traces = Vec::new();
        for &z in &z_list {
            let tr = s.trace_diff(&SpectralFunction::gz(z))?;
            traces.push(tr);
            values.push(ValueRecord::new(format!("trace_gz(z={z})"), tr, pred, 0.01, "z-independence of the g_z trace"));
        }
        let (lo, hi) = traces.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
        values.push(ValueRecord::new("trace_gz_spread", (hi - lo) / pred.abs().max(f64::MIN_POSITIVE), 0.0, 0.005, "z-independence of the g_z trace"));

        let phi = self.potential()?;
        let arctan_pred = 0.5 * s.integral_trace;
        let eig_route = s.trace_diff(&SpectralFunction::Arctan)?;
        let psi = transport(&phi, &grid, 0.0)?;
        let (kernel_route, _) = arctan_diff_kernel_matrix_case(&phi, &psi, &grid)?;
        values.push(ValueRecord::new("arctan_trace_eig", eig_route, arctan_pred, 0.01, "arctan trace equals half the integral of tr Φ"));
        values.push(ValueRecord::new("arctan_trace_kernel", kernel_route, arctan_pred, 0.01, "arctan trace equals half the integral of tr Φ"));
        values.push(ValueRecord::new("arctan_routes_agree", eig_route, kernel_route, 0.01, "arctan trace equals half the integral of tr Φ"));

        let mut inputs = self.base_inputs(&grid);
        inputs["z_list"] = json!(z_list);
        Ok(ExperimentOutput { report: TraceReport::new("trace", inputs, values), tables: Vec::new() })
    }

    fn ssf(&self) -> Result<ExperimentOutput> {
        let grid = self.grid(Experiment::Ssf)?;
        let s = self.model_spectra(&grid)?;
        let fit = ssf_constant_fit_spectra(&s)?;
        let anchor = "constant spectral shift from the arctan trace";
        let mut values = vec![
            ValueRecord::new("xi_arctan", fit.xi_arctan, fit.predicted, 0.01, anchor),
            ValueRecord::new("xi_g", fit.xi_g, fit.predicted, 0.01, anchor),
            ValueRecord::new("xi_fits_agree", fit.xi_arctan, fit.xi_g, 0.01, anchor),
        ];

        let phi = self.potential()?;
        let hyp = check_hypothesis(&phi, &tanh_switch(self.cfg.switch_scale())?, &grid);
        let mut hyp_table = Table::new("hypothesis", &["clause", "measured", "threshold", "pass"]);
        for c in &hyp.clauses {
            hyp_table.push(vec![c.name.clone(), f(c.measured), f(c.threshold), c.pass.to_string()]);
        }
        let failing = hyp.clauses.iter().filter(|c| !c.pass).count();
        values.push(ValueRecord::new("hypothesis_failing_clauses", failing as f64, 0.0, 0.0, "standing hypothesis on Φ and θ"));

        let o = oracle_suite(self.cfg.seed)?;
        let anchor = "finite-dimensional spectral shift";
        values.push(ValueRecord::new("krein_counting", o.krein_max_residual, 0.0, 1e-10, anchor));
        values.push(ValueRecord::new("logdet_vs_resolvent", o.logdet_max_rel_err, 0.0, 1e-6, anchor));
        values.push(ValueRecord::new("ssf_determinant_vs_counting", o.ssf_det_max_diff, 0.0, 0.01, anchor));

        let mut inputs = self.base_inputs(&grid);
        inputs["seed"] = json!(self.cfg.seed);
        inputs["switch_scale"] = json!(self.cfg.switch_scale());
        Ok(ExperimentOutput { report: TraceReport::new("ssf", inputs, values), tables: vec![hyp_table] })
    }

    fn pushnitski(&self) -> Result<ExperimentOutput> {
        let mut values = Vec::new();
        let mut table = Table::new("transform", &["profile", "lambda", "measured", "predicted"]);
        let lambdas = [0.1, 1.0, 10.0];
        let mut worst = 0.0_f64;
        for c in [0.0, 0.37, 0.5 / PI.sqrt()] {
            let xi = SSFProfile::constant(c);
            for &l in &lambdas {
                let v = pushnitski_transform(&xi, l)?;
                worst = worst.max((v - c).abs());
                table.push(vec![format!("constant({c})"), f(l), f(v), f(c)]);
            }
        }
        values.push(ValueRecord::new("constant_in_constant_out", worst, 0.0, 1e-10, "Pushnitski transform of a constant"));
        let ind = SSFProfile::indicator(-1.0, 1.0)?;
        for (l, want) in [(0.25, 1.0), (4.0, 1.0 / 3.0)] {
            let v = pushnitski_transform(&ind, l)?;
            table.push(vec!["indicator(-1,1)".into(), f(l), f(v), f(want)]);
            values.push(ValueRecord::new(format!("indicator(lambda={l})"), v, want, 1e-4, "arcsin closed form"));
        }
        let inputs = json!({"lambdas": lambdas, "indicator": [-1.0, 1.0]});
        Ok(ExperimentOutput { report: TraceReport::new("pushnitski", inputs, values), tables: vec![table] })
    }

    fn witten(&self) -> Result<ExperimentOutput> {
        let grid = self.grid(Experiment::Witten)?;
        let s = self.model_spectra(&grid)?;
        let z_list = self.cfg.z_list();
        let mut values = principal_trace_consistency_spectra(&s, &z_list)?.values;

        let o = oracle_suite(self.cfg.seed)?;
        values.push(ValueRecord::new("square_truncation", o.square_obstruction, 0.0, 1e-10, "square truncations have zero trace difference"));
        let mut rect = Table::new("rectangular", &["factor", "index", "max_deviation"]);
        for r in &o.rect {
            rect.push(vec![r.label.clone(), r.index.to_string(), f(r.max_deviation)]);
            values.push(ValueRecord::new(format!("delta_r[{}]", r.label), r.max_deviation, 0.0, 1e-12, "rectangular Witten index"));
        }

        let (samples, lim) = witten_model_route(&s, -1..=3)?;
        let mut ladder = Table::new("model_ladder", &["lambda", "delta_r"]);
        for (l, d) in &samples {
            ladder.push(vec![f(*l), f(*d)]);
        }
        ladder.push(vec!["richardson".into(), f(lim.value)]);
        values.push(ValueRecord::new("witten_model", lim.value, s.predicted_xi(), 0.01, "Witten index equals the spectral shift at zero"));

        let mut inputs = self.base_inputs(&grid);
        inputs["z_list"] = json!(z_list);
        inputs["seed"] = json!(self.cfg.seed);
        inputs["richardson_converged"] = json!(lim.converged);
        Ok(ExperimentOutput { report: TraceReport::new("witten", inputs, values), tables: vec![rect, ladder] })
    }

    fn gmw(&self) -> Result<ExperimentOutput> {
        let grid = self.grid(Experiment::Gmw)?;
        let fine = Grid1D::new(grid.length(), self.cfg.fine_n())?;
        let thetas = self.cfg.theta_angles();
        let t_list = self.cfg.t_list();
        let mut values = Vec::new();

        let xi = 0.5f64.sqrt();
        let tanh = SolitonProfile::tanh(xi);
        let r = gl_residual(&tanh, &tanh.natural_grid(0, 40.0, 1024)?)?;
        values.push(ValueRecord::new("gl_residual[tanh]", r, 0.0, 1e-8, "Ginzburg-Landau kink"));
        let sn = SolitonProfile::sn(0.9, xi)?;
        let r = gl_residual(&sn, &sn.natural_grid(4, 0.0, 512)?)?;
        values.push(ValueRecord::new("gl_residual[sn(k=0.9)]", r, 0.0, 1e-6, "Ginzburg-Landau periodic solution"));

        struct PerTheta {
            theta: f64,
            residuals: Vec<(f64, f64)>,
            kernel: usize,
            bprime: kreinlab::gmw::BprimeReport,
        }
        let per: Vec<PerTheta> = thetas
            .par_iter()
            .map(|&theta| -> Result<PerTheta> {
                let residuals = t_list
                    .iter()
                    .map(|&t| Ok((t, zero_mode(&GMWConfig::new(theta, t, grid.clone())?)?.residual)))
                    .collect::<Result<Vec<_>>>()?;
                let kernel = kernel_dimension_probe(&GMWConfig::new(theta, t_list[0], grid.clone())?)?;
                let bprime = bprime_norm_identities(theta, &t_list, &fine)?;
                Ok(PerTheta { theta, residuals, kernel, bprime })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut modes = Table::new("zero_modes", &["theta", "t", "residual"]);
        let mut norms = Table::new("bprime", &["theta", "t", "sup_norm", "sup_predicted", "hs2_block", "hs2_scalar", "hs2_predicted"]);
        for p in &per {
            let th = format!("{:.6}", p.theta);
            let worst = p.residuals.iter().map(|r| r.1).fold(0.0, f64::max);
            for (t, r) in &p.residuals {
                modes.push(vec![f(p.theta), f(*t), f(*r)]);
            }
            values.push(ValueRecord::new(format!("zero_mode_residual(theta={th})"), worst, 0.0, 1e-5, "explicit zero mode of the boosted soliton"));
            values.push(ValueRecord::new(format!("kernel_count(theta={th})"), p.kernel as f64, 1.0, 0.0, "one-dimensional kernel"));
            let b = &p.bprime;
            for row in &b.rows {
                norms.push(vec![f(p.theta), f(row.t), f(row.sup_norm), f(b.sup_predicted), f(row.hs2_block), f(row.hs2_scalar), f(b.hs2_predicted)]);
                values.push(ValueRecord::new(
                    format!("sup_norm(theta={th},t={})", row.t),
                    row.sup_norm,
                    b.sup_predicted,
                    1e-3 / b.sup_predicted,
                    "operator norm of B′",
                ));
                values.push(ValueRecord::new(
                    format!("hs2(theta={th},t={})", row.t),
                    row.hs2_scalar,
                    b.hs2_predicted,
                    0.02,
                    "Hilbert-Schmidt norm of B′(|A₋|+1)^{-1}",
                ));
            }
            values.push(ValueRecord::new(format!("sup_norm_spread(theta={th})"), b.sup_spread, 0.0, 1e-3, "operator norm of B′"));
            values.push(ValueRecord::new(format!("hs2_spread(theta={th})"), b.hs2_spread, 0.0, 1e-3, "Hilbert-Schmidt norm of B′(|A₋|+1)^{-1}"));
        }
        let asym = Grid1D::new(30.0, 128)?;
        let theta0 = thetas[0];
        let count = constant_profile_count(theta0, 1.0, &asym, 0.9)? + constant_profile_count(theta0, -1.0, &asym, 0.9)?;
        values.push(ValueRecord::new("asymptotic_gap_count", count as f64, 0.0, 0.0, "asymptotic operators are invertible"));

        let inputs = json!({
            "grid": {"length": grid.length(), "n": grid.len()},
            "fine_n": fine.len(),
            "theta_angles": thetas,
            "t_list": t_list,
        });
        Ok(ExperimentOutput { report: TraceReport::new("gmw", inputs, values), tables: vec![modes, norms] })
    }

    fn commutator(&self) -> Result<ExperimentOutput> {
        let phi = self.potential()?;
        let sizes = self.cfg.sizes();
        let spacing = self.cfg.spacing();
        let fns = [CommutatorFunction::SmoothSignG, CommutatorFunction::Sgn];
        let jobs: Vec<(CommutatorFunction, usize)> = fns.iter().flat_map(|&g| sizes.iter().map(move |&n| (g, n))).collect();
        let recs = jobs
            .par_iter()
            .map(|&(g, n)| sv_size_record(&phi, g, n, spacing))
            .collect::<kreinlab::Result<Vec<_>>>()?;
        let mut studies: Vec<SVGrowthRecord> = Vec::new();
        for (i, &g) in fns.iter().enumerate() {
            let chunk = recs[i * sizes.len()..(i + 1) * sizes.len()].to_vec();
            studies.push(classify_growth(g, spacing, chunk)?);
        }

        let mut values = Vec::new();
        let mut totals = Table::new("totals", &["function", "n", "length", "total"]);
        let mut partial = Table::new("partial_sums", &["function", "n", "k", "partial_sum"]);
        for st in &studies {
            for r in &st.sizes {
                totals.push(vec![st.function.name().into(), r.n.to_string(), f(r.length), f(r.total)]);
                for (k, p) in r.partial_sums.iter().enumerate() {
                    partial.push(vec![st.function.name().into(), r.n.to_string(), (k + 1).to_string(), f(*p)]);
                }
            }
        }
        let g = &studies[0];
        let last = *g.relative_changes.last().unwrap_or(&f64::NAN);
        values.push(ValueRecord::new("g_last_relative_change", last.abs(), 0.0, 0.02, "[ψ, g(D)] is trace class"));
        let sgn = &studies[1];
        let min_change = sgn.relative_changes.iter().copied().fold(f64::INFINITY, f64::min);
        values.push(ValueRecord::exceeds("sgn_min_relative_change", min_change, 0.10, "[ψ, sgn(D)] is not trace class"));
        values.push(ValueRecord::exceeds("sgn_log_slope", sgn.log_slope, 0.0, "[ψ, sgn(D)] is not trace class"));

        let inputs = json!({"potential": self.cfg.potential_spec(), "sizes": sizes, "spacing": spacing});
        Ok(ExperimentOutput { report: TraceReport::new("commutator", inputs, values), tables: vec![totals, partial] })
    }

    fn convergence(&self) -> Result<ExperimentOutput> {
        let grid = self.grid(Experiment::Convergence)?;
        let phi = self.potential()?;
        let mut cutoffs = self.cfg.cutoffs();
        let full = grid.max_momentum() + 1.0;
        cutoffs.retain(|&c| c < full);
        cutoffs.push(full);
        let rows = truncation_convergence(&phi, &grid, &cutoffs)?;
        let mut table = Table::new("ladder", &["cutoff", "rank", "nuclear_norm"]);
        for r in &rows {
            table.push(vec![f(r.cutoff), r.rank.to_string(), f(r.nuclear_norm)]);
        }
        let bad = rows.windows(2).filter(|w| !(w[1].nuclear_norm < w[0].nuclear_norm)).count();
        let anchor = "truncated operators converge in trace norm";
        let values = vec![
            ValueRecord::new("non_decreasing_steps", bad as f64, 0.0, 0.0, anchor),
            ValueRecord::new("full_cutoff_distance", rows.last().map_or(f64::NAN, |r| r.nuclear_norm), 0.0, 0.0, anchor),
        ];
        let mut inputs = self.base_inputs(&grid);
        inputs["cutoffs"] = json!(cutoffs);
        Ok(ExperimentOutput { report: TraceReport::new("convergence", inputs, values), tables: vec![table] })
    }
}
