//! BiCGSTAB for the matrix-free Crank-Nicolson system.

use crate::C64;

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) struct Solve {
    pub solution: Vec<C64>,
    pub residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` given the action of `A`; `tol` is relative to `‖b‖`.
pub(crate) fn bicgstab<E>(
    apply: impl Fn(&[C64]) -> Result<Vec<C64>, E>,
    b: &[C64],
    guess: Vec<C64>,
    tol: f64,
    max_iter: usize,
) -> Result<Solve, E> {
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut x = guess;
    let ax = apply(&x)?;
    let mut r: Vec<C64> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
    let r_hat = r.clone();
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let (mut rho, mut alpha, mut omega) = (one, one, one);
    let mut v = vec![zero; b.len()];
    let mut p = vec![zero; b.len()];
    let mut res = norm(&r) / bnorm;
    for _ in 0..max_iter {
        if res <= tol {
            return Ok(Solve { solution: x, residual: res, converged: true });
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() == 0.0 || omega.norm() == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..p.len() {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        v = apply(&p)?;
        let denom = dot(&r_hat, &v);
        if denom.norm() == 0.0 {
            break;
        }
        alpha = rho / denom;
        let s: Vec<C64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if norm(&s) / bnorm <= tol {
            for i in 0..x.len() {
                x[i] += alpha * p[i];
            }
            res = norm(&s) / bnorm;
            return Ok(Solve { solution: x, residual: res, converged: true });
        }
        let t = apply(&s)?;
        let tt = dot(&t, &t);
        omega = if tt.norm() == 0.0 { zero } else { dot(&t, &s) / tt };
        for i in 0..x.len() {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm(&r) / bnorm;
    }
    Ok(Solve { converged: res <= tol, solution: x, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_complex_system() {
        let a = [
            [C64::new(4.0, 1.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(3.0, -1.0), C64::new(0.5, 0.5)],
            [C64::new(0.0, 0.0), C64::new(0.5, -0.5), C64::new(2.0, 0.0)],
        ];
        let apply = |x: &[C64]| -> Result<Vec<C64>, ()> {
            Ok((0..3).map(|i| (0..3).map(|j| a[i][j] * x[j]).sum()).collect())
        };
        let b = vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(-1.0, 1.0)];
        let out = bicgstab(apply, &b, vec![C64::new(0.0, 0.0); 3], 1e-14, 100).unwrap();
        assert!(out.converged);
        let ax = apply(&out.solution).unwrap();
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }
}
