//! Box-constrained smoothing solve for the emissivity subproblem:
//!
//! minimize  sum_k (a_k x_k - b_k)^2 + rho sum_k (x_{k+1} - x_k)^2
//! subject to lo <= x_k <= hi
//!
//! The Hessian is tridiagonal, so each active-set pass is one Thomas sweep.

/// Solve `T x = r` for tridiagonal `T` given by `sub`, `diag`, `sup`.
/// `sub[0]` and `sup[n-1]` are ignored.
pub(crate) fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64], out: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum State {
    Free,
    Lower,
    Upper,
}

/// Minimize the smoothing objective within `[lo, hi]`. `x` holds a warm
/// start on entry and the solution on exit.
///
/// `ridge` adds `ridge * (x - x_start)^2` per channel so the problem stays
/// strictly convex when every `a_k` vanishes.
pub(crate) fn solve_box(
    a: &[f64],
    b: &[f64],
    rho: f64,
    lo: f64,
    hi: f64,
    ridge: f64,
    x: &mut [f64],
) {
    let n = a.len();
    let anchor = x.to_vec();
    let tol = 1e-12
        * (0..n)
            .map(|k| (a[k] * b[k]).abs() + a[k] * a[k])
            .fold(rho + ridge, f64::max);
    if rho == 0.0 {
        for k in 0..n {
            let h = a[k] * a[k] + ridge;
            if h > 0.0 {
                x[k] = ((a[k] * b[k] + ridge * anchor[k]) / h).clamp(lo, hi);
            }
        }
        return;
    }

    let mut state = vec![State::Free; n];
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let hess_diag = |k: usize| {
        let deg = if n == 1 {
            0.0
        } else if k == 0 || k == n - 1 {
            1.0
        } else {
            2.0
        };
        a[k] * a[k] + ridge + rho * deg
    };

    for _pass in 0..(2 * n + 10) {
        for k in 0..n {
            match state[k] {
                State::Free => {
                    diag[k] = hess_diag(k);
                    rhs[k] = a[k] * b[k] + ridge * anchor[k];
                    sub[k] = 0.0;
                    sup[k] = 0.0;
                    if k > 0 {
                        match state[k - 1] {
                            State::Free => sub[k] = -rho,
                            State::Lower => rhs[k] += rho * lo,
                            State::Upper => rhs[k] += rho * hi,
                        }
                    }
                    if k + 1 < n {
                        match state[k + 1] {
                            State::Free => sup[k] = -rho,
                            State::Lower => rhs[k] += rho * lo,
                            State::Upper => rhs[k] += rho * hi,
                        }
                    }
                }
                State::Lower | State::Upper => {
                    diag[k] = 1.0;
                    sub[k] = 0.0;
                    sup[k] = 0.0;
                    rhs[k] = if state[k] == State::Lower { lo } else { hi };
                }
            }
        }
        thomas(&sub, &diag, &sup, &rhs, x);

        let mut changed = false;
        for k in 0..n {
            if state[k] == State::Free {
                if x[k] < lo {
                    state[k] = State::Lower;
                    changed = true;
                } else if x[k] > hi {
                    state[k] = State::Upper;
                    changed = true;
                }
            }
        }
        if changed {
            continue;
        }
        // release bound variables whose multiplier has the wrong sign
        for k in 0..n {
            if state[k] == State::Free {
                continue;
            }
            let g = gradient_component(a, b, rho, ridge, &anchor, x, k);
            let release = match state[k] {
                State::Lower => g < -tol,
                State::Upper => g > tol,
                State::Free => false,
            };
            if release {
                state[k] = State::Free;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
    // active-set cycling is not expected; finish with projected Gauss-Seidel
    for _ in 0..2000 {
        for k in 0..n {
            let mut r = a[k] * b[k] + ridge * anchor[k];
            if k > 0 {
                r += rho * x[k - 1];
            }
            if k + 1 < n {
                r += rho * x[k + 1];
            }
            x[k] = (r / hess_diag(k)).clamp(lo, hi);
        }
    }
}

fn gradient_component(
    a: &[f64],
    b: &[f64],
    rho: f64,
    ridge: f64,
    anchor: &[f64],
    x: &[f64],
    k: usize,
) -> f64 {
    let n = x.len();
    let mut g = a[k] * (a[k] * x[k] - b[k]) + ridge * (x[k] - anchor[k]);
    if k > 0 {
        g += rho * (x[k] - x[k - 1]);
    }
    if k + 1 < n {
        g += rho * (x[k] - x[k + 1]);
    }
    g
}
