use std::collections::BTreeMap;

use num_complex::Complex64;

use super::leibniz::{classical_pieces, BracketOperator, BracketOutput, HamiltonianSlot};
use crate::cohomology::MultibracketTensor;
use crate::enveloping::{
    poly_matrix_multiply_truncated, realize, Deformation, Enveloping, HbarPoly, Monomial, PolyMatrix, ProductMode,
};
use crate::error::{Error, Result};
use crate::lie_core::LieAlgebraData;
use crate::linalg::{frobenius, is_finite, max_abs_diff, scale_real, sorted_eigenvalues, trace, CMatrix};

/// Snapshot of a classical trajectory.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub f: CMatrix,
    pub t: f64,
    /// Number of completed steps.
    pub step: usize,
    pub monitors: Vec<(String, f64)>,
}

/// State space the RK4 stepper works on.
pub trait FlowVector: Clone {
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, s: f64) -> Self;
}

impl FlowVector for CMatrix {
    fn plus(&self, other: &Self) -> Self {
        self + other
    }

    fn times(&self, s: f64) -> Self {
        scale_real(self, s)
    }
}

impl FlowVector for PolyMatrix {
    fn plus(&self, other: &Self) -> Self {
        self.add(other).expect("flow states share a shape")
    }

    fn times(&self, s: f64) -> Self {
        self.scale_real(s)
    }
}

/// One classical RK4 step. Both state types go through this exact sequence
/// of operations, which is what makes the K = 0 quantum flow reproduce the
/// classical one bit for bit.
pub fn rk4_step<V: FlowVector>(y: &V, h: f64, mut f: impl FnMut(&V) -> Result<V>) -> Result<V> {
    let k1 = f(y)?;
    let k2 = f(&y.plus(&k1.times(h / 2.0)))?;
    let k3 = f(&y.plus(&k2.times(h / 2.0)))?;
    let k4 = f(&y.plus(&k3.times(h)))?;
    let s = k1.plus(&k2.times(2.0)).plus(&k3.times(2.0)).plus(&k4);
    Ok(y.plus(&s.times(h / 6.0)))
}

/// A configured flow `Ḟ = {F, H_2, …, H_2j}`.
#[derive(Clone, Debug)]
pub struct FlowProblem {
    g: LieAlgebraData,
    tensor: MultibracketTensor,
    hams: Vec<HamiltonianSlot>,
    op: BracketOperator,
}

impl FlowProblem {
    pub fn new(g: &LieAlgebraData, tensor: &MultibracketTensor, hams: Vec<HamiltonianSlot>) -> Result<Self> {
        let op = BracketOperator::new(g, tensor, &hams)?;
        Ok(Self {
            g: g.clone(),
            tensor: tensor.clone(),
            hams,
            op,
        })
    }

    pub fn algebra(&self) -> &LieAlgebraData {
        &self.g
    }

    pub fn tensor(&self) -> &MultibracketTensor {
        &self.tensor
    }

    pub fn hamiltonians(&self) -> &[HamiltonianSlot] {
        &self.hams
    }

    pub fn operator(&self) -> &BracketOperator {
        &self.op
    }

    /// Right-hand side of the flow at `F`.
    pub fn generator(&self, f: &CMatrix) -> Result<BracketOutput> {
        self.op.apply(f)
    }
}

/// A recorded classical trajectory. Sample `i` sits at `t = i·h`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub h: f64,
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    /// Monitor series in column order; each has one value per sample.
    pub monitors: Vec<(String, Vec<f64>)>,
    /// Generator evaluations whose input had a residual above the warning bound.
    pub residual_warnings: usize,
    pub max_residual: f64,
}

impl Trajectory {
    pub fn last(&self) -> &CMatrix {
        self.states.last().expect("trajectories hold the initial state")
    }

    pub fn monitor(&self, name: &str) -> Option<&[f64]> {
        self.monitors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn final_state(&self) -> FlowState {
        let i = self.states.len() - 1;
        FlowState {
            f: self.states[i].clone(),
            t: self.times[i],
            step: i,
            monitors: self.monitors.iter().map(|(n, v)| (n.clone(), v[i])).collect(),
        }
    }

    /// Largest deviation of each `drift:` monitor from zero.
    pub fn conservation(&self) -> BTreeMap<String, f64> {
        self.monitors
            .iter()
            .filter_map(|(n, v)| {
                n.strip_prefix("drift:")
                    .map(|label| (label.to_string(), v.iter().copied().fold(0.0, f64::max)))
            })
            .collect()
    }
}

struct MonitorSet {
    names: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl MonitorSet {
    fn new(d: usize, hams: &[HamiltonianSlot]) -> Self {
        let mut names = vec!["trace_re".to_string(), "trace_im".to_string(), "norm".to_string()];
        for i in 0..d {
            names.push(format!("eig{}_re", i + 1));
            names.push(format!("eig{}_im", i + 1));
        }
        for h in hams {
            names.push(format!("overlap:{}", h.label));
        }
        for h in hams {
            names.push(format!("drift:{}", h.label));
        }
        let values = vec![Vec::new(); names.len()];
        Self { names, values }
    }

    fn record(&mut self, f: &CMatrix, hams: &[HamiltonianSlot], evolved: &[CMatrix]) {
        let tr = trace(f);
        let mut row = vec![tr.re, tr.im, frobenius(f)];
        for z in sorted_eigenvalues(f) {
            row.push(z.re);
            row.push(z.im);
        }
        for h in hams {
            row.push(trace(&(h.matrix.adjoint() * f)).re);
        }
        for (h, e) in hams.iter().zip(evolved) {
            row.push(max_abs_diff(e, &h.matrix));
        }
        for (series, v) in self.values.iter_mut().zip(row) {
            series.push(v);
        }
    }

    fn current(&self) -> Vec<(String, f64)> {
        self.names
            .iter()
            .zip(&self.values)
            .filter_map(|(n, v)| v.last().map(|x| (n.clone(), *x)))
            .collect()
    }
}

fn check_step(duration: f64, h: f64) -> Result<usize> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!("step must be positive, got {h}")));
    }
    if !(duration.is_finite() && duration >= h) {
        return Err(Error::domain(format!("duration {duration} shorter than the step {h}")));
    }
    Ok((duration / h).round() as usize)
}

/// Fixed-step RK4 from `F0` over `[0, T]`; `T/h` is rounded to a whole
/// number of steps.
pub fn evolve_classical(problem: &FlowProblem, f0: &CMatrix, duration: f64, h: f64) -> Result<Trajectory> {
    let steps = check_step(duration, h)?;
    integrate(problem, f0, steps, h)
}

/// `steps` RK4 steps of signed size `h`; a negative `h` runs time backwards.
/// Each slot Hamiltonian is carried along as its own state for the drift
/// monitors.
pub fn integrate(problem: &FlowProblem, f0: &CMatrix, steps: usize, h: f64) -> Result<Trajectory> {
    let d = problem.g.rep_dim();
    if f0.shape() != (d, d) {
        return Err(Error::domain(format!("initial state must be {d}×{d}")));
    }
    if !h.is_finite() || h == 0.0 {
        return Err(Error::domain(format!("step must be finite and nonzero, got {h}")));
    }
    let hams = &problem.hams;
    let mut monitors = MonitorSet::new(d, hams);
    let mut f = f0.clone();
    let mut evolved: Vec<CMatrix> = hams.iter().map(|x| x.matrix.clone()).collect();
    let mut times = vec![0.0];
    let mut states = vec![f.clone()];
    monitors.record(&f, hams, &evolved);
    let (mut warnings, mut max_residual) = (0usize, 0.0f64);

    for step in 1..=steps {
        let mut rhs = |y: &CMatrix| -> Result<CMatrix> {
            let out = problem.generator(y)?;
            if out.warning {
                warnings += 1;
            }
            max_residual = max_residual.max(out.residual_norm);
            Ok(out.value)
        };
        let next = rk4_step(&f, h, &mut rhs)?;
        if !is_finite(&next) {
            return Err(Error::NonFinite {
                step,
                t: step as f64 * h,
                last_good: Box::new(FlowState {
                    f,
                    t: (step - 1) as f64 * h,
                    step: step - 1,
                    monitors: monitors.current(),
                }),
            });
        }
        for e in evolved.iter_mut() {
            *e = rk4_step(e, h, |y| Ok(problem.generator(y)?.value))?;
        }
        f = next;
        monitors.record(&f, hams, &evolved);
        times.push(step as f64 * h);
        states.push(f.clone());
    }
    Ok(Trajectory {
        h,
        times,
        states,
        monitors: monitors.names.into_iter().zip(monitors.values).collect(),
        residual_warnings: warnings,
        max_residual,
    })
}

/// Self-convergence ratio `|F_h − F_{h/2}| / |F_{h/2} − F_{h/4}|` at the
/// final time; close to 16 for a fourth-order method.
pub fn order_check(problem: &FlowProblem, f0: &CMatrix, duration: f64, h: f64) -> Result<f64> {
    let steps = check_step(duration, h)?;
    let run = |k: usize| -> Result<CMatrix> { Ok(integrate(problem, f0, steps * k, h / k as f64)?.last().clone()) };
    let (a, b, c) = (run(1)?, run(2)?, run(4)?);
    Ok(max_abs_diff(&a, &b) / max_abs_diff(&b, &c))
}

/// Trajectory of a quantum flow; states are polynomial matrices in `x, ħ`.
#[derive(Clone, Debug)]
pub struct QuantumTrajectory {
    pub h: f64,
    pub truncation: usize,
    pub times: Vec<f64>,
    pub states: Vec<PolyMatrix>,
}

impl QuantumTrajectory {
    pub fn last(&self) -> &PolyMatrix {
        self.states.last().expect("trajectories hold the initial state")
    }
}

struct QuantumPiece {
    coeff: Complex64,
    gen: usize,
    pref: Option<PolyMatrix>,
    suf: Option<PolyMatrix>,
}

struct QuantumGenerator<'a> {
    problem: &'a FlowProblem,
    env: &'a Enveloping,
    slots: Vec<Vec<QuantumPiece>>,
    k: usize,
}

impl QuantumGenerator<'_> {
    fn apply(&self, f: &PolyMatrix) -> Result<PolyMatrix> {
        let g = &self.problem.g;
        let (d, nvars) = (f.d(), f.nvars());
        let mut channels: BTreeMap<(Monomial, usize), CMatrix> = BTreeMap::new();
        for i in 0..d {
            for j in 0..d {
                for (m, c) in f.get(i, j).terms() {
                    for (k, z) in c.coeffs().iter().enumerate() {
                        channels.entry((m.clone(), k)).or_insert_with(|| CMatrix::zeros(d, d))[(i, j)] = *z;
                    }
                }
            }
        }
        let mut out = PolyMatrix::zeros(d, nvars);
        for ((m, k), coeff_matrix) in channels {
            let c = g.decompose(&coeff_matrix)?.coeffs;
            let hk = HbarPoly::monomial(Complex64::new(1.0, 0.0), k);
            let term = if self.problem.op.linear_slots() {
                PolyMatrix::from_term(&self.problem.op.apply_coeffs(&c), nvars, &m, &hk)
            } else {
                let mut gens = Vec::with_capacity(self.slots.len());
                self.expand(&c, &m, &hk, &mut gens)?
            };
            out = out.add(&term)?;
        }
        Ok(out.truncate_hbar(self.k))
    }

    fn expand(&self, c: &[Complex64], m: &Monomial, hk: &HbarPoly, gens: &mut Vec<usize>) -> Result<PolyMatrix> {
        let g = &self.problem.g;
        let d = g.rep_dim();
        let level = gens.len();
        if level == self.slots.len() {
            let mut base = CMatrix::zeros(d, d);
            let mut lower = Vec::with_capacity(gens.len() + 1);
            for (a, ca) in c.iter().enumerate() {
                if *ca == Complex64::new(0.0, 0.0) || gens.contains(&a) {
                    continue;
                }
                lower.clear();
                lower.push(a);
                lower.extend_from_slice(gens);
                for (b, v) in self.problem.tensor.components(&lower) {
                    base += g.basis()[b].map(|z| z * (ca * v));
                }
            }
            return Ok(PolyMatrix::from_term(&base, g.dim(), m, hk));
        }
        let mut acc = PolyMatrix::zeros(d, g.dim());
        for p in &self.slots[level] {
            if gens.contains(&p.gen) {
                continue;
            }
            gens.push(p.gen);
            let mut inner = self.expand(c, m, hk, gens)?;
            gens.pop();
            if inner.is_zero() {
                continue;
            }
            if let Some(pref) = &p.pref {
                inner = poly_matrix_multiply_truncated(self.env, pref, &inner, ProductMode::Star, self.k)?;
            }
            if let Some(suf) = &p.suf {
                inner = poly_matrix_multiply_truncated(self.env, &inner, suf, ProductMode::Star, self.k)?;
            }
            acc = acc.add(&inner.scale(p.coeff))?;
        }
        Ok(acc)
    }
}

fn with_step(step: usize, e: Error) -> Error {
    match e {
        Error::DegreeOverflow { degree, cap } => Error::FlowDegreeOverflow { step, degree, cap },
        other => other,
    }
}

/// Quantum counterpart of [`evolve_classical`]: the same Leibniz expansion,
/// with every product of realised factors taken in star mode and ħ powers
/// above `k` dropped after each evaluation and each step.
///
/// Polynomial degree is bounded by the degree cap of `env`.
pub fn evolve_quantum(
    problem: &FlowProblem,
    env: &Enveloping,
    f0: &PolyMatrix,
    duration: f64,
    h: f64,
    k: usize,
) -> Result<QuantumTrajectory> {
    let steps = check_step(duration, h)?;
    let g = &problem.g;
    if env.dim() != g.dim() || f0.d() != g.rep_dim() || f0.nvars() != g.dim() {
        return Err(Error::domain("initial state does not match the algebra"));
    }
    let realize_word = |w: &Monomial| -> Result<Option<PolyMatrix>> {
        if w.degree() == 0 {
            return Ok(None);
        }
        let e = env.word(w.indices(), Deformation::Classical)?;
        Ok(Some(realize(g, &e)?))
    };
    let mut slots = Vec::with_capacity(problem.hams.len());
    for ham in &problem.hams {
        let mut ps = Vec::new();
        for p in classical_pieces(&ham.word)? {
            ps.push(QuantumPiece {
                coeff: p.coeff,
                gen: p.gen,
                pref: realize_word(&p.pref)?,
                suf: realize_word(&p.suf)?,
            });
        }
        slots.push(ps);
    }
    let qg = QuantumGenerator { problem, env, slots, k };
    let cap = env.max_degree();
    let mut f = f0.truncate_hbar(k);
    let mut times = vec![0.0];
    let mut states = vec![f.clone()];
    for step in 1..=steps {
        f = rk4_step(&f, h, |y| qg.apply(y)).map_err(|e| with_step(step, e))?;
        f = f.truncate_hbar(k);
        if let Some(degree) = f.degree().filter(|deg| *deg > cap) {
            return Err(Error::FlowDegreeOverflow { step, degree, cap });
        }
        times.push(step as f64 * h);
        states.push(f.clone());
    }
    Ok(QuantumTrajectory {
        h,
        truncation: k,
        times,
        states,
    })
}
