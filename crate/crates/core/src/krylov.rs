//! Right-preconditioned BiCGStab.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::precond::Preconditioner;
use crate::pressure::PseudoLaplacian;
use crate::sem::field::{axpy, dot, norm};

/// Residual recomputation period.
const TRUE_RESIDUAL_EVERY: usize = 25;
/// Relative size below which `ρ` or `ω` count as breakdown.
const BREAKDOWN: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Stop when `‖b - A x‖ <= tol ‖b - A x0‖`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovReport {
    pub iterations: usize,
    /// `‖r_k‖ / ‖r_0‖` after every iteration, starting with 1.
    pub relative_residuals: Vec<f64>,
    pub wall_time_s: f64,
    pub converged: bool,
    pub breakdown: bool,
}

impl KrylovReport {
    pub fn final_relative_residual(&self) -> f64 {
        *self.relative_residuals.last().unwrap_or(&f64::NAN)
    }
}

fn finite(v: &[f64], what: &str, iteration: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Krylov(format!("non-finite {what} at iteration {iteration}")))
    }
}

/// Solves `A x = b` with right preconditioning, `A P^-1 y = b`, `x = P^-1 y`,
/// so the monitored residual is the true residual of the original system.
pub fn bicgstab<A, P>(
    mut apply_a: A,
    mut apply_pinv: P,
    b: &[f64],
    x0: &[f64],
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, KrylovReport)>
where
    A: FnMut(&[f64], &mut [f64]) -> Result<()>,
    P: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = b.len();
    check_len(n, x0.len())?;
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1), got {}", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    let start = Instant::now();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let residual = |a: &mut A, x: &[f64], r: &mut [f64]| -> Result<()> {
        a(x, r)?;
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        Ok(())
    };
    residual(&mut apply_a, &x, &mut r)?;
    finite(&r, "initial residual", 0)?;
    let r0_norm = norm(&r);
    let mut report = KrylovReport {
        iterations: 0,
        relative_residuals: vec![1.0],
        wall_time_s: 0.0,
        converged: false,
        breakdown: false,
    };
    if r0_norm == 0.0 {
        report.relative_residuals.push(0.0);
        report.converged = true;
        report.wall_time_s = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }
    let target = opts.tol * r0_norm;

    let r_hat = r.clone();
    let r_hat_norm = r0_norm;
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];

    for it in 1..=opts.max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < BREAKDOWN * r_hat_norm * norm(&r) || rho_new == 0.0 {
            report.breakdown = true;
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        apply_pinv(&p, &mut p_hat)?;
        apply_a(&p_hat, &mut v)?;
        finite(&v, "search direction", it)?;
        let rv = dot(&r_hat, &v);
        if rv.abs() < BREAKDOWN * r_hat_norm * norm(&v) || rv == 0.0 {
            report.breakdown = true;
            break;
        }
        alpha = rho / rv;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        report.iterations = it;
        if norm(&s) <= target {
            axpy(alpha, &p_hat, &mut x);
            residual(&mut apply_a, &x, &mut r)?;
            let rel = norm(&r) / r0_norm;
            report.relative_residuals.push(rel);
            if rel <= opts.tol {
                report.converged = true;
                break;
            }
            continue;
        }
        apply_pinv(&s, &mut s_hat)?;
        apply_a(&s_hat, &mut t)?;
        finite(&t, "stabilizer direction", it)?;
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        axpy(alpha, &p_hat, &mut x);
        axpy(omega, &s_hat, &mut x);
        finite(&x, "iterate", it)?;
        if it % TRUE_RESIDUAL_EVERY == 0 {
            residual(&mut apply_a, &x, &mut r)?;
        } else {
            for k in 0..n {
                r[k] = s[k] - omega * t[k];
            }
        }
        let mut rel = norm(&r) / r0_norm;
        if rel <= opts.tol && it % TRUE_RESIDUAL_EVERY != 0 {
            // confirm against the true residual before stopping
            residual(&mut apply_a, &x, &mut r)?;
            rel = norm(&r) / r0_norm;
        }
        report.relative_residuals.push(rel);
        if rel <= opts.tol {
            report.converged = true;
            break;
        }
        if omega.abs() < BREAKDOWN {
            report.breakdown = true;
            break;
        }
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((x, report))
}

/// Zero-mean noise for the initial guess.
pub fn random_initial_guess(op: &PseudoLaplacian, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..op.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    op.project_out_mean(&mut x);
    x
}

/// BiCGStab on `E p = b` with `P` applied on the right. The preconditioned
/// vectors and the returned iterate are normalized to zero mean.
pub fn solve_pressure(
    op: &PseudoLaplacian,
    precond: &Preconditioner,
    b: &[f64],
    x0: &[f64],
    opts: &KrylovOptions,
) -> Result<(Vec<f64>, KrylovReport)> {
    let (mut x, report) = bicgstab(
        |u, out| op.apply_into(u, out),
        |r, out| {
            precond.apply_into(r, out)?;
            op.project_out_mean(out);
            Ok(())
        },
        b,
        x0,
        opts,
    )?;
    op.project_out_mean(&mut x);
    Ok((x, report))
}
