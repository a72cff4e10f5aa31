//! Incompressible MHD in Elsässer variables `Z± = u ± b`:
//!
//! ```text
//! ∂t Z± + (Z∓·∇) Z± = -∇p± + ν± ΔZ± + ν∓ ΔZ∓,   ∇·Z± = 0,   ν± = (ν ± η) / 2
//! ```
//!
//! Time stepping is the two-stage explicit scheme
//! `Z_j = Z^n - (Δt/k) M^-1 (M A∓ Z± - D^T p± + ν± L Z± + ν∓ L Z∓)` with
//! `k = 2` then `k = 1`, each stage projected onto discretely divergence-free
//! fields by one pressure solve.

use crate::error::{Error, Result};
use crate::krylov::{solve_pressure, KrylovOptions, KrylovReport};
use crate::precond::Preconditioner;
use crate::pressure::PseudoLaplacian;
use crate::sem::{block_from_slice, block_to_slice, Discretization, PressureField, VelocityField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub nu: f64,
    pub eta_resistivity: f64,
}

impl PhysicalParams {
    pub fn new(nu: f64, eta_resistivity: f64) -> Result<Self> {
        if !(nu >= 0.0 && eta_resistivity >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "viscosity and resistivity must be non-negative, got {nu} and {eta_resistivity}"
            )));
        }
        Ok(Self { nu, eta_resistivity })
    }

    pub fn nu_plus(&self) -> f64 {
        0.5 * (self.nu + self.eta_resistivity)
    }

    pub fn nu_minus(&self) -> f64 {
        0.5 * (self.nu - self.eta_resistivity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MhdState {
    pub z_plus: VelocityField,
    pub z_minus: VelocityField,
    /// Stage pressures, scaled by the stage step `Δt / k`.
    pub p_plus: PressureField,
    pub p_minus: PressureField,
    pub time: f64,
    pub dt: f64,
}

impl MhdState {
    /// State with `Z± = u ± b`.
    pub fn from_physical(u: &VelocityField, b: &VelocityField, dt: f64) -> Result<Self> {
        u.check_conforms(b)?;
        let mut z_plus = u.clone();
        z_plus.axpy(1.0, b);
        let mut z_minus = u.clone();
        z_minus.axpy(-1.0, b);
        let ng = (u.order - 1) * (u.order - 1);
        let zero = PressureField::from_vec(u.order, u.elements, vec![0.0; ng * u.elements])?;
        Ok(Self { z_plus, z_minus, p_plus: zero.clone(), p_minus: zero, time: 0.0, dt })
    }

    /// `(u, b) = ((Z+ + Z-) / 2, (Z+ - Z-) / 2)`
    pub fn recover_physical(&self) -> (VelocityField, VelocityField) {
        let mut u = self.z_plus.clone();
        u.axpy(1.0, &self.z_minus);
        u.scale(0.5);
        let mut b = self.z_plus.clone();
        b.axpy(-1.0, &self.z_minus);
        b.scale(0.5);
        (u, b)
    }
}

/// Divergence left after one projected stage, relative to the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageDiagnostics {
    pub divergence_plus: f64,
    pub divergence_minus: f64,
    pub iterations: [usize; 2],
}

#[derive(Debug)]
pub struct MhdStepper {
    op: PseudoLaplacian,
    precond: Preconditioner,
    pub params: PhysicalParams,
    pub krylov: KrylovOptions,
    /// One entry per completed stage.
    pub diagnostics: Vec<StageDiagnostics>,
    pub reports: Vec<KrylovReport>,
}

impl MhdStepper {
    pub fn new(
        op: PseudoLaplacian,
        precond: Preconditioner,
        params: PhysicalParams,
        krylov: KrylovOptions,
    ) -> Self {
        Self { op, precond, params, krylov, diagnostics: Vec::new(), reports: Vec::new() }
    }

    pub fn op(&self) -> &PseudoLaplacian {
        &self.op
    }

    pub fn disc(&self) -> &Discretization {
        self.op.disc()
    }

    /// Collocation `(a·∇) z` at the GLL nodes, weighted by the mass and
    /// summed over shared nodes.
    pub fn advective_term(&self, adv: &VelocityField, z: &VelocityField) -> Result<VelocityField> {
        let disc = self.disc();
        adv.check_conforms(z)?;
        crate::error::check_len(disc.velocity_len(), z.len())?;
        let n1 = disc.ops.n_gll();
        let nv = n1 * n1;
        let (hx, hy) = disc.mesh.element_size();
        let d = &disc.ops.deriv;
        let dt = d.transpose();
        let mass = disc.element_mass();
        let mut out = VelocityField::zeros(z.order, z.elements);
        let mut dx = vec![0.0; nv];
        let mut dy = vec![0.0; nv];
        for e in 0..disc.num_elements() {
            let range = e * nv..(e + 1) * nv;
            for c in 0..2 {
                let ze = block_from_slice(n1, n1, &z.comps[c][range.clone()]);
                block_to_slice(&(&ze * &dt * (2.0 / hx)), &mut dx);
                block_to_slice(&(d * &ze * (2.0 / hy)), &mut dy);
                let dst = &mut out.comps[c][range.clone()];
                for k in 0..nv {
                    let (ax, ay) = (adv.comps[0][e * nv + k], adv.comps[1][e * nv + k]);
                    dst[k] = mass[k] * (ax * dx[k] + ay * dy[k]);
                }
            }
        }
        disc.dssum(&mut out);
        Ok(out)
    }

    /// `M A∓ Z± + ν± L Z± + ν∓ L Z∓` for both signs.
    fn rhs(&self, state: &MhdState) -> Result<[VelocityField; 2]> {
        let disc = self.disc();
        let lp = disc.apply_stiffness(&state.z_plus)?;
        let lm = disc.apply_stiffness(&state.z_minus)?;
        let (np, nm) = (self.params.nu_plus(), self.params.nu_minus());
        let mut rp = self.advective_term(&state.z_minus, &state.z_plus)?;
        rp.axpy(np, &lp);
        rp.axpy(nm, &lm);
        let mut rm = self.advective_term(&state.z_plus, &state.z_minus)?;
        rm.axpy(np, &lm);
        rm.axpy(nm, &lp);
        Ok([rp, rm])
    }

    /// One stage: explicit update of `base` with the tendency evaluated at
    /// `current`, followed by the pressure projection.
    pub fn rk_stage(&mut self, base: &MhdState, current: &MhdState, k: f64) -> Result<MhdState> {
        let stage = self.diagnostics.len();
        let h = base.dt / k;
        let rhs = self.rhs(current)?;
        let mut next = base.clone();
        let mut diag = StageDiagnostics { divergence_plus: 0.0, divergence_minus: 0.0, iterations: [0; 2] };
        for (s, mut r) in rhs.into_iter().enumerate() {
            // g = h M^-1 R - Z^n, so the projected field is -g + M^-1 D^T p
            self.disc().mass_inverse(&mut r);
            let (z_base, p_warm) = if s == 0 {
                (&base.z_plus, &current.p_plus)
            } else {
                (&base.z_minus, &current.p_minus)
            };
            let mut g = r;
            g.scale(h);
            g.axpy(-1.0, z_base);
            let b = self.op.build_rhs(&g)?;
            let (p, report) = solve_pressure(&self.op, &self.precond, &b.data, &p_warm.data, &self.krylov)?;
            if !report.converged {
                return Err(Error::NotConverged { stage, report: Box::new(report) });
            }
            diag.iterations[s] = report.iterations;
            self.reports.push(report);
            let p = PressureField::from_vec(g.order, g.elements, p)?;
            let mut z = self.disc().apply_gradient(&p)?;
            self.disc().mass_inverse(&mut z);
            z.axpy(-1.0, &g);
            let div = self.relative_divergence(&z)?;
            if s == 0 {
                next.z_plus = z;
                next.p_plus = p;
                diag.divergence_plus = div;
            } else {
                next.z_minus = z;
                next.p_minus = p;
                diag.divergence_minus = div;
            }
        }
        self.diagnostics.push(diag);
        Ok(next)
    }

    /// One full time step: stages with `k = 2` and `k = 1`.
    pub fn step(&mut self, state: &MhdState) -> Result<MhdState> {
        let half = self.rk_stage(state, state, 2.0)?;
        let mut next = self.rk_stage(state, &half, 1.0)?;
        next.time = state.time + state.dt;
        Ok(next)
    }

    /// `‖D z‖ / ‖z‖` with the Euclidean norm of the weak divergence and the
    /// L2 norm of the field; 0 for a zero field.
    pub fn relative_divergence(&self, z: &VelocityField) -> Result<f64> {
        let d = self.disc().apply_divergence(z)?;
        let zn = self.disc().velocity_l2_dot(z, z).sqrt();
        Ok(if zn == 0.0 { 0.0 } else { d.norm() / zn })
    }

    /// `∫ (|Z+|² + |Z-|²) / 4`, the total energy `∫ (|u|² + |b|²) / 2`.
    pub fn energy(&self, state: &MhdState) -> f64 {
        let disc = self.disc();
        0.25 * (disc.velocity_l2_dot(&state.z_plus, &state.z_plus)
            + disc.velocity_l2_dot(&state.z_minus, &state.z_minus))
    }
}
