//! Complex modified nodal analysis.
//!
//! Node voltages plus one auxiliary current per voltage-defined branch
//! (independent sources and VCVS). The system is assembled densely at each
//! frequency and solved by LU with partial pivoting; a relative residual
//! check backstops the factorization.

use super::{AcResult, Branch, SmallSignalCircuit};
use crate::error::{Error, Result};
use num_complex::Complex64;

const RESIDUAL_LIMIT: f64 = 1e-9;

impl SmallSignalCircuit {
    /// Node voltages (index 0 = ground = 0 V) with the given per-source
    /// drive values.
    pub fn solve_with_drives(&self, f: f64, drives: &[Complex64]) -> Result<Vec<Complex64>> {
        if f <= 0.0 || !f.is_finite() {
            return Err(Error::Domain(format!("frequency must be positive, got {f}")));
        }
        if drives.len() != self.sources.len() {
            return Err(Error::Solver(format!(
                "expected {} source drives, got {}",
                self.sources.len(),
                drives.len()
            )));
        }
        let omega = 2.0 * std::f64::consts::PI * f;
        let n_nodes = self.node_names.len();
        let n_vcvs = self
            .branches
            .iter()
            .filter(|b| matches!(b, Branch::Vcvs { .. }))
            .count();
        let dim = n_nodes + n_vcvs + self.sources.len();
        if dim == 0 {
            return Ok(vec![Complex64::ZERO]);
        }

        let mut a = vec![Complex64::ZERO; dim * dim];
        let mut b = vec![Complex64::ZERO; dim];

        // KCL rows are 0..n_nodes (node k of the circuit maps to row k-1).
        let stamp = |m: &mut Vec<Complex64>, r: usize, c: usize, v: Complex64| {
            m[r * dim + c] += v;
        };
        let one = Complex64::new(1.0, 0.0);

        let mut aux = n_nodes;
        for branch in &self.branches {
            match *branch {
                Branch::Conductance { a: na, b: nb, g } => {
                    let y = Complex64::new(g, 0.0);
                    stamp_pair(&mut a, dim, na, nb, y);
                }
                Branch::Capacitance { a: na, b: nb, c } => {
                    let y = Complex64::new(0.0, omega * c);
                    stamp_pair(&mut a, dim, na, nb, y);
                }
                Branch::Vccs { p, n, cp, cn, gm } => {
                    let g = Complex64::new(gm, 0.0);
                    for (row, sign_r) in [(p, 1.0), (n, -1.0)] {
                        if row == 0 {
                            continue;
                        }
                        for (col, sign_c) in [(cp, 1.0), (cn, -1.0)] {
                            if col == 0 {
                                continue;
                            }
                            stamp(&mut a, row - 1, col - 1, g * sign_r * sign_c);
                        }
                    }
                }
                Branch::Vcvs { p, n, cp, cn, mu } => {
                    let r = aux;
                    aux += 1;
                    if p != 0 {
                        stamp(&mut a, p - 1, r, one);
                        stamp(&mut a, r, p - 1, one);
                    }
                    if n != 0 {
                        stamp(&mut a, n - 1, r, -one);
                        stamp(&mut a, r, n - 1, -one);
                    }
                    let m = Complex64::new(mu, 0.0);
                    if cp != 0 {
                        stamp(&mut a, r, cp - 1, -m);
                    }
                    if cn != 0 {
                        stamp(&mut a, r, cn - 1, m);
                    }
                }
                Branch::CurrentSource { p, n, value } => {
                    let i = Complex64::new(value, 0.0);
                    if p != 0 {
                        b[p - 1] += i;
                    }
                    if n != 0 {
                        b[n - 1] -= i;
                    }
                }
            }
        }
        for (s, drive) in self.sources.iter().zip(drives) {
            let r = aux;
            aux += 1;
            if s.p != 0 {
                stamp(&mut a, s.p - 1, r, one);
                stamp(&mut a, r, s.p - 1, one);
            }
            if s.n != 0 {
                stamp(&mut a, s.n - 1, r, -one);
                stamp(&mut a, r, s.n - 1, -one);
            }
            b[r] = *drive;
        }

        let factors = lu_factor(&a, dim)?;
        let mut x = factors.solve(&b);

        // Iterative refinement drives the relative residual down to the
        // contract. The acceptance threshold carries a backward-stability
        // floor: with entries as large as the op-amp open-loop gain the
        // residual cannot even be evaluated below eps * |A| * |x|.
        let b_norm: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let a_max = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut residual_ok = b_norm == 0.0;
        for _ in 0..4 {
            if residual_ok {
                break;
            }
            let mut r = vec![Complex64::ZERO; dim];
            for i in 0..dim {
                let mut acc = Complex64::ZERO;
                for j in 0..dim {
                    acc += a[i * dim + j] * x[j];
                }
                r[i] = b[i] - acc;
            }
            let r_norm: f64 = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let x_norm: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let floor = 4.0 * f64::EPSILON * a_max * x_norm;
            if r_norm <= RESIDUAL_LIMIT * b_norm + floor {
                residual_ok = true;
                break;
            }
            let dx = factors.solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        if !residual_ok {
            return Err(Error::Solver(format!(
                "solution residual stayed above {RESIDUAL_LIMIT:.0e} after refinement"
            )));
        }

        let mut voltages = vec![Complex64::ZERO; n_nodes + 1];
        voltages[1..].copy_from_slice(&x[..n_nodes]);
        Ok(voltages)
    }

    /// Transfer from the designated input source to the output node at one
    /// frequency.
    pub fn solve_ac(&self, f: f64) -> Result<AcResult> {
        let mut drives = vec![Complex64::ZERO; self.sources.len()];
        if self.sources.is_empty() {
            return Err(Error::Solver("circuit has no independent source to drive".into()));
        }
        drives[self.input_source] = Complex64::new(1.0, 0.0);
        let v = self.solve_with_drives(f, &drives)?;
        let vin = v[self.input_node];
        if vin.norm() == 0.0 {
            return Err(Error::Solver("input node sits at 0 V; cannot form a transfer ratio".into()));
        }
        Ok(AcResult::new(f, v[self.output_node] / vin))
    }

    /// Log-spaced frequency response, endpoints included.
    pub fn sweep(&self, f_start: f64, f_stop: f64, points: usize) -> Result<Vec<AcResult>> {
        if !(f_start > 0.0 && f_stop > f_start) {
            return Err(Error::Domain(format!(
                "sweep needs 0 < f_start < f_stop, got {f_start}..{f_stop}"
            )));
        }
        if points < 2 {
            return Err(Error::Domain("sweep needs at least 2 points".into()));
        }
        let ratio = f_stop / f_start;
        (0..points)
            .map(|i| {
                let f = if i == points - 1 {
                    f_stop
                } else {
                    f_start * ratio.powf(i as f64 / (points - 1) as f64)
                };
                self.solve_ac(f)
            })
            .collect()
    }
}

fn stamp_pair(a: &mut [Complex64], dim: usize, na: usize, nb: usize, y: Complex64) {
    if na != 0 {
        a[(na - 1) * dim + (na - 1)] += y;
    }
    if nb != 0 {
        a[(nb - 1) * dim + (nb - 1)] += y;
    }
    if na != 0 && nb != 0 {
        a[(na - 1) * dim + (nb - 1)] -= y;
        a[(nb - 1) * dim + (na - 1)] -= y;
    }
}

struct LuFactors {
    lu: Vec<Complex64>,
    pivots: Vec<usize>,
    n: usize,
}

/// Dense LU with partial pivoting; factors are kept for re-solves during
/// iterative refinement.
fn lu_factor(a_in: &[Complex64], n: usize) -> Result<LuFactors> {
    let mut a = a_in.to_vec();
    let mut pivots = vec![0usize; n];

    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Solver("floating node or degenerate circuit (empty system)".into()));
    }
    let tiny = scale * 1e-14;

    for k in 0..n {
        let mut max_val = a[k * n + k].norm();
        let mut max_row = k;
        for i in (k + 1)..n {
            let v = a[i * n + k].norm();
            if v > max_val {
                max_val = v;
                max_row = i;
            }
        }
        if max_val <= tiny {
            return Err(Error::Solver("floating node or degenerate circuit (singular matrix)".into()));
        }
        pivots[k] = max_row;
        if max_row != k {
            for j in 0..n {
                a.swap(k * n + j, max_row * n + j);
            }
        }
        let pivot = a[k * n + k];
        for i in (k + 1)..n {
            let factor = a[i * n + k] / pivot;
            a[i * n + k] = factor;
            for j in (k + 1)..n {
                let a_kj = a[k * n + j];
                a[i * n + j] -= factor * a_kj;
            }
        }
    }
    Ok(LuFactors { lu: a, pivots, n })
}

impl LuFactors {
    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = b.to_vec();
        // The stored multipliers are kept in fully permuted row order, so
        // every interchange must hit the right-hand side before the
        // triangular solves.
        for k in 0..n {
            x.swap(k, self.pivots[k]);
        }
        for k in 0..n {
            let x_k = x[k];
            for (i, xi) in x.iter_mut().enumerate().skip(k + 1) {
                *xi -= self.lu[i * n + k] * x_k;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let x_j = x[j];
                x[i] -= self.lu[i * n + j] * x_j;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::super::SsBuilder;
    use super::*;

    #[test]
    fn resistive_divider_is_half_at_any_frequency() {
        let mut b = SsBuilder::new();
        let inn = b.node("in");
        let mid = b.node("mid");
        let src = b.vsource(inn, 0);
        b.resistor(inn, mid, 1000.0);
        b.resistor(mid, 0, 1000.0);
        let ssc = b.build(src, inn, mid).unwrap();
        for f in [1.0, 1e3, 1e6] {
            let r = ssc.solve_ac(f).unwrap();
            assert!((r.magnitude - 0.5).abs() < 1e-12, "f={f}: {}", r.magnitude);
        }
    }

    #[test]
    fn rc_corner_hits_minus_3db_and_minus_45_degrees() {
        let mut b = SsBuilder::new();
        let inn = b.node("in");
        let out = b.node("out");
        let src = b.vsource(inn, 0);
        b.resistor(inn, out, 1000.0);
        b.capacitor(out, 0, 1e-6);
        let ssc = b.build(src, inn, out).unwrap();
        let f_c = 1.0 / (2.0 * std::f64::consts::PI * 1000.0 * 1e-6);
        let r = ssc.solve_ac(f_c).unwrap();
        assert!((r.magnitude - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert!((r.phase_deg - (-45.0)).abs() < 1e-6);
    }

    #[test]
    fn vcvs_closes_a_feedback_loop() {
        // non-inverting amp around an ideal gain block: 1 + R2/R1 = 11
        let mut b = SsBuilder::new();
        let inn = b.node("in");
        let fb = b.node("fb");
        let out = b.node("out");
        let src = b.vsource(inn, 0);
        b.resistor(fb, 0, 1000.0);
        b.resistor(out, fb, 10_000.0);
        b.vcvs(out, 0, inn, fb, 1e7);
        let ssc = b.build(src, inn, out).unwrap();
        let r = ssc.solve_ac(1000.0).unwrap();
        assert!((r.magnitude - 11.0).abs() < 1e-4, "{}", r.magnitude);
    }

    #[test]
    fn floating_node_is_reported() {
        let mut b = SsBuilder::new();
        let inn = b.node("in");
        let orphan = b.node("orphan");
        let other = b.node("other");
        let src = b.vsource(inn, 0);
        b.resistor(inn, 0, 100.0);
        // orphan-other hangs with no path to the rest
        b.resistor(orphan, other, 50.0);
        let ssc = b.build(src, inn, orphan).unwrap();
        let err = ssc.solve_ac(100.0).unwrap_err();
        assert!(err.to_string().contains("degenerate"), "{err}");
    }

    #[test]
    fn superposition_scales_linearly() {
        let mut b = SsBuilder::new();
        let inn = b.node("in");
        let out = b.node("out");
        let src = b.vsource(inn, 0);
        b.resistor(inn, out, 2200.0);
        b.capacitor(out, 0, 4.7e-9);
        b.resistor(out, 0, 10_000.0);
        let ssc = b.build(src, inn, out).unwrap();
        let one = ssc
            .solve_with_drives(1234.5, &[Complex64::new(1.0, 0.0)])
            .unwrap()[out];
        let two = ssc
            .solve_with_drives(1234.5, &[Complex64::new(2.0, 0.0)])
            .unwrap()[out];
        assert!((two - one * 2.0).norm() < 1e-12 * one.norm());
    }

    #[test]
    fn sweep_is_log_spaced_and_inclusive() {
        let mut b = SsBuilder::new();
        let inn = b.node("in");
        let out = b.node("out");
        let src = b.vsource(inn, 0);
        b.resistor(inn, out, 1000.0);
        b.resistor(out, 0, 1000.0);
        let ssc = b.build(src, inn, out).unwrap();
        let rs = ssc.sweep(1.0, 1e6, 7).unwrap();
        let freqs: Vec<f64> = rs.iter().map(|r| r.frequency).collect();
        for (i, f) in freqs.iter().enumerate() {
            assert!((f - 10f64.powi(i as i32)).abs() <= 1e-9 * f, "{freqs:?}");
        }
        assert!(freqs.windows(2).all(|w| w[0] < w[1]));
        assert!(ssc.sweep(0.0, 10.0, 3).is_err());
        assert!(ssc.sweep(1.0, 10.0, 1).is_err());
    }
}
