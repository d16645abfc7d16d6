//! Gauss–Legendre quadrature helpers.

use std::cell::Cell;
use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(12))
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * x.iter().zip(w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>()
}

/// Adaptive bisection with a 12-point rule per panel. Each panel gets a
/// share of `tol` proportional to its length, floored at 1e-12 of the
/// integral's magnitude; refinement also stops once a budget of panels is
/// spent, so a noisy integrand cannot stall the recursion.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    struct Ctx<'a, F> {
        f: &'a F,
        density: f64,
        budget: Cell<u32>,
    }
    fn recurse<F: Fn(f64) -> f64>(ctx: &Ctx<F>, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = panel(ctx.f, a, m);
        let right = panel(ctx.f, m, b);
        let refined = left + right;
        let spent = ctx.budget.get();
        if depth == 0 || spent == 0 || (refined - whole).abs() <= ctx.density * (b - a) || m <= a || m >= b {
            return refined;
        }
        ctx.budget.set(spent - 1);
        recurse(ctx, a, m, left, depth - 1) + recurse(ctx, m, b, right, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = panel(f, a, b);
    let tol = tol.max(1e-12 * whole.abs());
    let ctx = Ctx { f, density: tol / (b - a).abs(), budget: Cell::new(20_000) };
    recurse(&ctx, a, b, whole, max_depth)
}

/// Integral over [a, b] after the smoothstep substitution
/// x = a + (b−a)(3u² − 2u³), which tames 1/sqrt endpoint singularities.
pub fn adaptive_endpoint_smooth<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    let len = b - a;
    let g = |u: f64| {
        let x = a + len * u * u * (3.0 - 2.0 * u);
        let jac = 6.0 * len * u * (1.0 - u);
        if jac == 0.0 {
            0.0
        } else {
            f(x) * jac
        }
    };
    adaptive(&g, 0.0, 1.0, tol, max_depth)
}
