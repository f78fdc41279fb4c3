//! Driven Tavis-Cummings battery on a truncated Fock ⊗ spin space.
//!
//! ```text
//! H(t) = g(t)/√(2s) (S⁺a + S⁻a†) + F (a + a†)
//! ```
//!
//! The battery is a collective spin `s` started in its lowest-weight state
//! `|m = -s⟩`, the charger a Fock mode truncated at `n_cutoff` levels and
//! started in vacuum. For large `s` the Holstein-Primakoff map
//! `S⁺ ≈ √(2s) b†` turns this into the bosonic battery of [`crate::dynamics`],
//! and the battery energy `ω₀(⟨S_z⟩ + s)` approaches `ω₀|⟨b⟩|²`.
//!
//! Basis states `|n⟩ ⊗ |m⟩` are stored at index `n (2s+1) + (m + s)`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::{self, EnergyTrace};
use crate::error::{Error, Result};
use crate::model::{QuenchProtocol, SystemParams};
use crate::ode::{Dopri5, GridSampler, Tolerance};
use crate::scaling::sweep_samples;

/// Largest accepted probability in the top Fock level.
pub const LEAKAGE_THRESHOLD: f64 = 1e-6;
/// Largest accepted deviation of the state norm from one.
pub const NORM_DRIFT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcConfig {
    twice_s: u32,
    n_cutoff: usize,
    params: SystemParams,
    protocol: QuenchProtocol,
}

impl TcConfig {
    /// `s` must be a positive integer or half-integer; `n_cutoff >= 2`.
    /// Dissipation is not supported.
    pub fn new(s: f64, n_cutoff: usize, params: SystemParams, protocol: QuenchProtocol) -> Result<Self> {
        let twice = 2.0 * s;
        if !(s > 0.0 && twice.fract() == 0.0 && twice <= u32::MAX as f64) {
            return Err(Error::domain(format!("spin must be a positive multiple of 1/2, got {s}")));
        }
        if n_cutoff < 2 {
            return Err(Error::domain(format!("n_cutoff must be >= 2, got {n_cutoff}")));
        }
        if params.gamma() != 0.0 {
            return Err(Error::Unsupported(
                "Tavis-Cummings evolution is unitary only; charger dissipation (gamma > 0) is not supported".into(),
            ));
        }
        Ok(Self { twice_s: twice as u32, n_cutoff, params, protocol })
    }

    pub fn s(&self) -> f64 {
        0.5 * self.twice_s as f64
    }

    pub fn twice_s(&self) -> u32 {
        self.twice_s
    }

    pub fn n_cutoff(&self) -> usize {
        self.n_cutoff
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn protocol(&self) -> &QuenchProtocol {
        &self.protocol
    }

    /// `2s + 1`.
    pub fn spin_dim(&self) -> usize {
        self.twice_s as usize + 1
    }

    /// `n_cutoff (2s + 1)`.
    pub fn dim(&self) -> usize {
        self.n_cutoff * self.spin_dim()
    }

    /// Basis index of charger level `n` and spin level `j = m + s`.
    pub fn index(&self, n: usize, j: usize) -> usize {
        n * self.spin_dim() + j
    }

    pub fn with_spin(&self, s: f64) -> Result<Self> {
        Self::new(s, self.n_cutoff, self.params, self.protocol)
    }

    pub fn with_cutoff(&self, n_cutoff: usize) -> Result<Self> {
        Self::new(self.s(), n_cutoff, self.params, self.protocol)
    }

    /// Charger vacuum ⊗ lowest-weight spin state.
    pub fn ground_state(&self) -> TcState {
        let mut amplitudes = vec![C64::new(0.0, 0.0); self.dim()];
        amplitudes[0] = C64::new(1.0, 0.0);
        TcState { amplitudes, time: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcState {
    pub amplitudes: Vec<C64>,
    pub time: f64,
}

impl TcState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Sparse Hamiltonian with its two time-independent pieces stored on one
/// pattern: `H(t) = c(t) K + F D` with `K = S⁺a + S⁻a†`, `D = a + a†`,
/// `c = g/√(2s)`. Both pieces are real symmetric.
#[derive(Debug, Clone)]
pub struct TcHamiltonian {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    k_vals: Vec<f64>,
    d_vals: Vec<f64>,
    coupling_scale: f64,
    drive: f64,
}

impl TcHamiltonian {
    pub fn new(cfg: &TcConfig) -> Self {
        let sd = cfg.spin_dim();
        let two_s = cfg.twice_s as usize;
        let nc = cfg.n_cutoff;
        let mut row_ptr = Vec::with_capacity(cfg.dim() + 1);
        let mut cols = Vec::new();
        let mut k_vals = Vec::new();
        let mut d_vals = Vec::new();
        row_ptr.push(0);
        for n in 0..nc {
            for j in 0..sd {
                // Columns in ascending order: (n-1, j), (n-1, j+1), (n+1, j-1), (n+1, j).
                if n > 0 {
                    let sn = (n as f64).sqrt();
                    cols.push(cfg.index(n - 1, j));
                    k_vals.push(0.0);
                    d_vals.push(sn);
                    if j < two_s {
                        // ⟨n-1, j+1| S⁺a |n, j⟩
                        cols.push(cfg.index(n - 1, j + 1));
                        k_vals.push(sn * (((two_s - j) * (j + 1)) as f64).sqrt());
                        d_vals.push(0.0);
                    }
                }
                if n + 1 < nc {
                    let sn1 = ((n + 1) as f64).sqrt();
                    if j > 0 {
                        // ⟨n+1, j-1| S⁻a† |n, j⟩
                        cols.push(cfg.index(n + 1, j - 1));
                        k_vals.push(sn1 * (((two_s - j + 1) * j) as f64).sqrt());
                        d_vals.push(0.0);
                    }
                    cols.push(cfg.index(n + 1, j));
                    k_vals.push(0.0);
                    d_vals.push(sn1);
                }
                row_ptr.push(cols.len());
            }
        }
        Self {
            row_ptr,
            cols,
            k_vals,
            d_vals,
            coupling_scale: 1.0 / (two_s as f64).sqrt(),
            drive: cfg.params.drive(),
        }
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// `out = H ψ` at coupling `g`.
    pub fn apply(&self, g: f64, psi: &[C64], out: &mut [C64]) {
        let c = g * self.coupling_scale;
        let f = self.drive;
        for (row, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += psi[self.cols[idx]] * (c * self.k_vals[idx] + f * self.d_vals[idx]);
            }
            *o = acc;
        }
    }

    /// `⟨ψ|H|ψ⟩` at coupling `g`.
    pub fn expectation(&self, g: f64, psi: &[C64]) -> C64 {
        let mut hpsi = vec![C64::new(0.0, 0.0); psi.len()];
        self.apply(g, psi, &mut hpsi);
        psi.iter().zip(&hpsi).map(|(p, h)| p.conj() * h).sum()
    }
}

/// TC time series on the output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TcTrace {
    pub s: f64,
    pub n_cutoff: usize,
    pub trace: EnergyTrace,
    pub norm: Vec<f64>,
    /// Probability in the top Fock level `n_cutoff - 1`.
    pub leakage: Vec<f64>,
    pub final_state: TcState,
}

impl TcTrace {
    pub fn max_norm_drift(&self) -> f64 {
        self.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_leakage(&self) -> f64 {
        self.leakage.iter().copied().fold(0.0, f64::max)
    }
}

/// Evolve from the ground state and validate the truncation.
///
/// Fails with [`Error::Cutoff`] when the top Fock level holds more than
/// [`LEAKAGE_THRESHOLD`] probability at any output time, and with
/// [`Error::Integrator`] when the norm drifts by more than
/// [`NORM_DRIFT_THRESHOLD`].
pub fn evolve_tc(cfg: &TcConfig, horizon: f64, n_out: usize, tol: f64) -> Result<TcTrace> {
    let out = evolve_state(cfg, &cfg.ground_state().amplitudes, horizon, n_out, tol)?;
    let leak = out.max_leakage();
    if leak > LEAKAGE_THRESHOLD {
        let estimate = required_cutoff(&cfg.params, &cfg.protocol, horizon).unwrap_or(0);
        let suggested = estimate.max(cfg.n_cutoff + cfg.n_cutoff.div_ceil(2));
        return Err(Error::Cutoff {
            n_cutoff: cfg.n_cutoff,
            leakage: leak,
            threshold: LEAKAGE_THRESHOLD,
            suggested,
        });
    }
    Ok(out)
}

/// Evolve an arbitrary unit-norm initial state. Only the norm is checked;
/// the truncation is not.
pub fn evolve_state(cfg: &TcConfig, initial: &[C64], horizon: f64, n_out: usize, tol: f64) -> Result<TcTrace> {
    if initial.len() != cfg.dim() {
        return Err(Error::domain(format!("state has length {}, expected {}", initial.len(), cfg.dim())));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::domain(format!("horizon must be > 0, got {horizon}")));
    }
    if n_out < 2 {
        return Err(Error::domain(format!("n_out must be >= 2, got {n_out}")));
    }
    if !(tol > 1e-14 && tol < 1e-3) {
        return Err(Error::domain(format!("tol must lie in (1e-14, 1e-3), got {tol}")));
    }

    let ham = TcHamiltonian::new(cfg);
    let dim = cfg.dim();
    let sd = cfg.spin_dim();
    let w = cfg.params.omega0();
    let times = dynamics::uniform_grid(horizon, n_out);
    let mut e_a = vec![0.0; n_out];
    let mut e_b = vec![0.0; n_out];
    let mut norm = vec![0.0; n_out];
    let mut leakage = vec![0.0; n_out];

    let observe = |psi: &[C64]| {
        let (mut nrm, mut na, mut nb, mut top) = (0.0, 0.0, 0.0, 0.0);
        for (idx, c) in psi.iter().enumerate() {
            let p = c.norm_sqr();
            let (n, j) = (idx / sd, idx % sd);
            nrm += p;
            na += p * n as f64;
            nb += p * j as f64;
            if n + 1 == cfg.n_cutoff {
                top += p;
            }
        }
        (nrm, w * na, w * nb, top)
    };

    let (n0, a0, b0, l0) = observe(initial);
    (norm[0], e_a[0], e_b[0], leakage[0]) = (n0, a0, b0, l0);

    let mut y = initial.to_vec();
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    let mut solver = Dopri5::new(dim);
    let mut sampler = GridSampler::new(&times, 1);
    let tolerance = Tolerance { rtol: tol, atol: tol };
    let tau = cfg.protocol.tau_q();
    let g_f = cfg.protocol.g_f();

    let mut pieces = vec![(0.0, horizon.min(tau), true)];
    if horizon > tau {
        pieces.push((tau, horizon, false));
    }
    for (t0, t1, on_ramp) in pieces {
        let protocol = cfg.protocol;
        let mut rhs = |t: f64, psi: &[C64], dpsi: &mut [C64]| {
            let g = if on_ramp { protocol.ramp_coupling(t) } else { g_f };
            ham.apply(g, psi, dpsi);
            for d in dpsi.iter_mut() {
                *d = C64::new(d.im, -d.re);
            }
        };
        let h_init = (t1 - t0) * 1e-6;
        solver.integrate(&mut rhs, t0, t1, &mut y, tolerance, h_init, |step| {
            sampler.drain(step, |i, t, s| {
                s.eval(t, &mut buf);
                let (n, a, b, l) = observe(&buf);
                (norm[i], e_a[i], e_b[i], leakage[i]) = (n, a, b, l);
            });
            Ok(())
        })?;
    }

    let n_init = norm[0];
    let drift = norm.iter().map(|n| (n - n_init).abs()).fold(0.0, f64::max);
    if drift > NORM_DRIFT_THRESHOLD {
        return Err(Error::Integrator(format!(
            "state norm drifted by {drift:.3e} (limit {NORM_DRIFT_THRESHOLD:.0e}); tighten the tolerance"
        )));
    }

    Ok(TcTrace {
        s: cfg.s(),
        n_cutoff: cfg.n_cutoff,
        trace: EnergyTrace::from_energies(times, e_a, e_b),
        norm,
        leakage,
        final_state: TcState { amplitudes: y, time: horizon },
    })
}

/// One row of a Holstein-Primakoff convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct HpPoint {
    pub s: f64,
    /// `max_t |E_B^TC - E_B^bos| / max_t E_B^bos`.
    pub error: f64,
    pub trace: TcTrace,
}

/// Run the TC model for each spin in `s_list` (ascending) and compare with
/// the bosonic model on the same grid. Spins run concurrently on `jobs`
/// workers (0 = global pool); results are in input order.
pub fn hp_convergence(
    base: &TcConfig,
    s_list: &[f64],
    horizon: f64,
    n_out: usize,
    tol: f64,
    jobs: usize,
) -> Result<Vec<HpPoint>> {
    if s_list.is_empty() {
        return Err(Error::domain("spin list is empty"));
    }
    if s_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("spin list must be strictly ascending"));
    }
    let cfgs = s_list.iter().map(|&s| base.with_spin(s)).collect::<Result<Vec<_>>>()?;

    let bos = dynamics::integrate_moments(&base.params, &base.protocol, horizon, n_out, tol.max(1e-13))?;
    let e_ref = dynamics::energy_trace(&bos).e_b;
    let scale = e_ref.iter().copied().fold(0.0, f64::max);

    let run = |cfg: &TcConfig| -> Result<HpPoint> {
        let trace = evolve_tc(cfg, horizon, n_out, tol)?;
        let diff = trace.trace.e_b.iter().zip(&e_ref).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let error = if scale > 0.0 { diff / scale } else { diff };
        Ok(HpPoint { s: cfg.s(), error, trace })
    };
    let results: Vec<Result<HpPoint>> = if jobs == 0 {
        cfgs.par_iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Integrator(format!("cannot start worker pool: {e}")))?;
        pool.install(|| cfgs.par_iter().map(run).collect())
    };
    results.into_iter().collect()
}

/// Fock cutoff estimate `ceil(4 max_t E_A / ω₀) + 10` from the bosonic model.
pub fn required_cutoff(params: &SystemParams, protocol: &QuenchProtocol, horizon: f64) -> Result<usize> {
    if params.drive() == 0.0 {
        return Ok(10);
    }
    let lossless = params.with_gamma(0.0)?;
    let n_out = sweep_samples(protocol.g_f(), horizon);
    let traj = dynamics::integrate_moments(&lossless, protocol, horizon, n_out, 1e-10)?;
    let max_ea = dynamics::energy_trace(&traj).e_a.iter().copied().fold(0.0, f64::max);
    Ok((4.0 * max_ea / params.omega0()).ceil() as usize + 10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(s: f64, nc: usize, f: f64) -> TcConfig {
        let p = SystemParams::closed(1.0, f).unwrap();
        let q = QuenchProtocol::power_law(1.0, 5.0, 1.0).unwrap();
        TcConfig::new(s, nc, p, q).unwrap()
    }

    fn dense(h: &TcHamiltonian, g: f64) -> Vec<Vec<f64>> {
        let n = h.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (c, col) in m.iter_mut().enumerate() {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[c] = C64::new(1.0, 0.0);
            let mut out = vec![C64::new(0.0, 0.0); n];
            h.apply(g, &e, &mut out);
            for (r, v) in out.iter().enumerate() {
                col[r] = v.re;
            }
        }
        m
    }

    #[test]
    fn config_validation() {
        let p = SystemParams::closed(1.0, 0.1).unwrap();
        let q = QuenchProtocol::power_law(1.0, 5.0, 1.0).unwrap();
        assert!(TcConfig::new(0.0, 5, p, q).is_err());
        assert!(TcConfig::new(0.3, 5, p, q).is_err());
        assert!(TcConfig::new(1.0, 1, p, q).is_err());
        let c = TcConfig::new(1.5, 4, p, q).unwrap();
        assert_eq!(c.spin_dim(), 4);
        assert_eq!(c.dim(), 16);
        assert_eq!(c.twice_s(), 3);
        let lossy = SystemParams::new(1.0, 0.1, 0.1).unwrap();
        assert!(matches!(TcConfig::new(1.0, 5, lossy, q), Err(Error::Unsupported(_))));
    }

    #[test]
    fn hamiltonian_is_symmetric_with_known_elements() {
        let c = cfg(1.0, 3, 0.5);
        let h = TcHamiltonian::new(&c);
        let g = 2.0_f64.sqrt();
        let m = dense(&h, g);
        for (r, row) in m.iter().enumerate() {
            for (col, v) in row.iter().enumerate() {
                assert_eq!(*v, m[col][r]);
            }
        }
        // g/√(2s) = 1: ⟨0, j=1| S⁺a |1, j=0⟩ = √1 · √(2·1) and drive √1 · F.
        let (a, b) = (c.index(0, 1), c.index(1, 0));
        assert!((m[a][b] - 2f64.sqrt()).abs() < 1e-15);
        assert!((m[c.index(0, 0)][c.index(1, 0)] - 0.5).abs() < 1e-15);
        assert!((m[c.index(1, 2)][c.index(2, 2)] - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m[c.index(0, 0)][c.index(0, 1)], 0.0);
    }

    #[test]
    fn zero_drive_keeps_ground_state() {
        let c = cfg(2.0, 4, 0.0);
        let out = evolve_tc(&c, 10.0, 101, 1e-12).unwrap();
        assert!(out.trace.e_b.iter().all(|&e| e == 0.0));
        assert!(out.trace.e_a.iter().all(|&e| e == 0.0));
        assert!(out.max_norm_drift() < 1e-14);
    }

    #[test]
    fn single_spin_half_rabi() {
        // s = 1/2 with one excitation: |1,↓⟩ ↔ |0,↑⟩ at frequency g (constant).
        let p = SystemParams::closed(1.0, 0.0).unwrap();
        let q = QuenchProtocol::constant(1.0, 1.0).unwrap();
        let c = TcConfig::new(0.5, 3, p, q).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); c.dim()];
        psi[c.index(1, 0)] = C64::new(1.0, 0.0);
        let out = evolve_state(&c, &psi, 5.0, 51, 1e-12).unwrap();
        for (t, e) in out.trace.times.iter().zip(&out.trace.e_b) {
            assert!((e - t.sin().powi(2)).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn hermiticity_probe() {
        let c = cfg(3.0, 6, 0.3);
        let h = TcHamiltonian::new(&c);
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..20 {
            let mut psi: Vec<C64> = (0..c.dim()).map(|_| C64::new(next(), next())).collect();
            let nrm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|z| *z /= nrm);
            let g = c.protocol().coupling_at(10.0 * (next() + 0.5)).unwrap();
            assert!(h.expectation(g, &psi).im.abs() < 1e-12);
        }
    }

    #[test]
    fn cutoff_error_suggests_larger() {
        let c = cfg(2.0, 2, 1.0);
        match evolve_tc(&c, 5.0, 51, 1e-10) {
            Err(Error::Cutoff { n_cutoff, suggested, .. }) => {
                assert_eq!(n_cutoff, 2);
                assert!(suggested > 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn required_cutoff_examples() {
        let q = QuenchProtocol::power_law(1.0, 50.0, 1.0).unwrap();
        let h = dynamics::default_horizon(&q);
        assert_eq!(required_cutoff(&SystemParams::closed(1.0, 0.0).unwrap(), &q, h).unwrap(), 10);
        let small = required_cutoff(&SystemParams::closed(1.0, 0.02).unwrap(), &q, h).unwrap();
        assert!(small >= 10);
        // E_A ∝ F²: a large drive makes the occupation term dominate.
        let n1 = required_cutoff(&SystemParams::closed(1.0, 1.0).unwrap(), &q, h).unwrap() - 10;
        let n2 = required_cutoff(&SystemParams::closed(1.0, 2.0).unwrap(), &q, h).unwrap() - 10;
        assert!((n2 as f64 / n1 as f64 - 4.0).abs() < 0.05, "{n1} {n2}");
    }

    #[test]
    fn hp_single_spin_row() {
        let c = cfg(4.0, 12, 0.02);
        let rows = hp_convergence(&c, &[4.0], 8.0, 81, 1e-11, 1).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].error < 0.05);
        assert!(hp_convergence(&c, &[], 8.0, 81, 1e-11, 1).is_err());
        assert!(hp_convergence(&c, &[4.0, 2.0], 8.0, 81, 1e-11, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn excitations_conserved_without_drive(
            twice_s in 1u32..8,
            r in 0.2f64..4.0,
            tau in 0.5f64..6.0,
            seed in any::<u64>(),
        ) {
            let p = SystemParams::closed(1.0, 0.0).unwrap();
            let q = QuenchProtocol::power_law(1.0, tau, r).unwrap();
            let c = TcConfig::new(0.5 * twice_s as f64, 5, p, q).unwrap();
            let mut state = seed | 1;
            let mut psi: Vec<C64> = (0..c.dim()).map(|_| {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                C64::new((state % 1000) as f64 / 1000.0 - 0.5, ((state >> 20) % 1000) as f64 / 1000.0 - 0.5)
            }).collect();
            let nrm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|z| *z /= nrm);
            let out = evolve_state(&c, &psi, 8.0, 41, 1e-12).unwrap();
            let total: Vec<f64> = out.trace.e_a.iter().zip(&out.trace.e_b).map(|(a, b)| a + b).collect();
            for v in &total {
                prop_assert!((v - total[0]).abs() < 1e-8);
            }
            prop_assert!(out.max_norm_drift() < 1e-8);
        }
    }
}
