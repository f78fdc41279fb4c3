//! Adaptive Dormand–Prince 5(4) integration of complex linear systems with
//! continuous (dense) output.
//!
//! Shared by the first-moment equations and the Tavis–Cummings state vector.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output (Hairer & Wanner, DOPRI5 contd5).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const MAX_STEPS: usize = 50_000_000;

/// Mixed error control: a component passes when its local error estimate is
/// below `atol + rtol * |y|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Continuous extension of one accepted step, valid on `[t_old, t_new]`.
pub struct DenseStep<'a> {
    t_old: f64,
    t_new: f64,
    h: f64,
    rcont: &'a [Vec<C64>; 5],
}

impl DenseStep<'_> {
    pub fn t_old(&self) -> f64 {
        self.t_old
    }

    pub fn t_new(&self) -> f64 {
        self.t_new
    }

    pub fn eval(&self, t: f64, out: &mut [C64]) {
        let th = ((t - self.t_old) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let [r0, r1, r2, r3, r4] = self.rcont;
        for (i, o) in out.iter_mut().enumerate() {
            *o = r0[i] + (r1[i] + (r2[i] + (r3[i] + r4[i] * th1) * th) * th1) * th;
        }
    }
}

pub struct Dopri5 {
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    ynew: Vec<C64>,
    rcont: [Vec<C64>; 5],
}

impl Dopri5 {
    pub fn new(dim: usize) -> Self {
        let z = || vec![C64::new(0.0, 0.0); dim];
        Self {
            k: [z(), z(), z(), z(), z(), z(), z()],
            ytmp: z(),
            ynew: z(),
            rcont: [z(), z(), z(), z(), z()],
        }
    }

    /// Advance `y` from `t0` to `t1` (`t1 > t0`). The final step lands on
    /// `t1` exactly; no step ever extends past it. `on_step` is called once
    /// per accepted step with its dense output.
    pub fn integrate<R, S>(
        &mut self,
        rhs: &mut R,
        t0: f64,
        t1: f64,
        y: &mut [C64],
        tol: Tolerance,
        h_init: f64,
        mut on_step: S,
    ) -> Result<Stats>
    where
        R: FnMut(f64, &[C64], &mut [C64]),
        S: FnMut(&DenseStep<'_>) -> Result<()>,
    {
        let n = y.len();
        assert_eq!(n, self.ytmp.len(), "state dimension mismatch");
        if !(t1 > t0) {
            return Ok(Stats::default());
        }
        let mut stats = Stats::default();
        let mut t = t0;
        let mut h = h_init.min(t1 - t0);
        if !(h > 0.0) {
            h = (t1 - t0) * 1e-6;
        }
        let mut last_rejected = false;

        rhs(t, y, &mut self.k[0]);
        stats.rhs_evals += 1;

        loop {
            let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
            if stats.accepted + stats.rejected >= MAX_STEPS {
                return Err(Error::Stiffness { t });
            }
            let mut last = false;
            if t + 1.01 * h >= t1 {
                h = t1 - t;
                last = true;
            }

            self.stages(rhs, t, h, y);
            stats.rhs_evals += 6;

            let [k1, _, k3, k4, k5, k6, k7] = &self.k;
            let mut acc = 0.0;
            let mut finite = true;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = tol.atol + tol.rtol * y[i].norm().max(self.ynew[i].norm());
                let r = e.norm() / sc;
                acc += r * r;
                finite &= self.ynew[i].re.is_finite() && self.ynew[i].im.is_finite();
            }
            let err = (acc / n.max(1) as f64).sqrt();

            if !finite || !err.is_finite() {
                if h <= h_min {
                    return Err(Error::Divergence { t });
                }
                h *= FAC_MIN;
                stats.rejected += 1;
                last_rejected = true;
                continue;
            }

            if err <= 1.0 {
                stats.accepted += 1;
                let t_new = if last { t1 } else { t + h };
                {
                    let [k1, _, k3, k4, k5, k6, k7] = &self.k;
                    let [r0, r1, r2, r3, r4] = &mut self.rcont;
                    for i in 0..n {
                        let ydiff = self.ynew[i] - y[i];
                        let bspl = k1[i] * h - ydiff;
                        r0[i] = y[i];
                        r1[i] = ydiff;
                        r2[i] = bspl;
                        r3[i] = ydiff - k7[i] * h - bspl;
                        r4[i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
                    }
                }
                on_step(&DenseStep { t_old: t, t_new, h, rcont: &self.rcont })?;
                y.copy_from_slice(&self.ynew);
                self.k.swap(0, 6);
                t = t_new;
                if last {
                    return Ok(stats);
                }
                let mut fac = SAFETY * err.max(1e-12).powf(-0.2);
                fac = fac.clamp(FAC_MIN, if last_rejected { 1.0 } else { FAC_MAX });
                h *= fac;
                last_rejected = false;
            } else {
                stats.rejected += 1;
                let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
                h *= fac;
                last_rejected = true;
                if h < h_min {
                    return Err(Error::Stiffness { t });
                }
            }
        }
    }

    // Fills k[1..7] and ynew given k[0] = f(t, y).
    fn stages<R>(&mut self, rhs: &mut R, t: f64, h: f64, y: &[C64])
    where
        R: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        let ytmp = &mut self.ytmp;
        let k = &mut self.k;

        for i in 0..n {
            ytmp[i] = y[i] + k[0][i] * (h * A21);
        }
        rhs(t + C2 * h, ytmp, &mut k[1]);
        for i in 0..n {
            ytmp[i] = y[i] + (k[0][i] * A31 + k[1][i] * A32) * h;
        }
        rhs(t + C3 * h, ytmp, &mut k[2]);
        for i in 0..n {
            ytmp[i] = y[i] + (k[0][i] * A41 + k[1][i] * A42 + k[2][i] * A43) * h;
        }
        rhs(t + C4 * h, ytmp, &mut k[3]);
        for i in 0..n {
            ytmp[i] = y[i] + (k[0][i] * A51 + k[1][i] * A52 + k[2][i] * A53 + k[3][i] * A54) * h;
        }
        rhs(t + C5 * h, ytmp, &mut k[4]);
        for i in 0..n {
            ytmp[i] = y[i]
                + (k[0][i] * A61 + k[1][i] * A62 + k[2][i] * A63 + k[3][i] * A64 + k[4][i] * A65) * h;
        }
        rhs(t + h, ytmp, &mut k[5]);
        for i in 0..n {
            self.ynew[i] = y[i]
                + (k[0][i] * A71 + k[2][i] * A73 + k[3][i] * A74 + k[4][i] * A75 + k[5][i] * A76) * h;
        }
        rhs(t + h, &self.ynew, &mut k[6]);
    }
}

/// Samples a uniform output grid from successive dense steps.
pub struct GridSampler<'a> {
    times: &'a [f64],
    next: usize,
}

impl<'a> GridSampler<'a> {
    /// `first` is the index of the first grid point not yet written.
    pub fn new(times: &'a [f64], first: usize) -> Self {
        Self { times, next: first }
    }

    pub fn next_index(&self) -> usize {
        self.next
    }

    /// Calls `write(index, t)` for every pending grid time inside the step.
    pub fn drain<W>(&mut self, step: &DenseStep<'_>, mut write: W)
    where
        W: FnMut(usize, f64, &DenseStep<'_>),
    {
        while self.next < self.times.len() && self.times[self.next] <= step.t_new() {
            let t = self.times[self.next];
            write(self.next, t, step);
            self.next += 1;
        }
    }
}
