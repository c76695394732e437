const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximiser of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > x_tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }

    0.5 * (lo + hi)
}

/// Coarse scan on `points` equally spaced nodes followed by golden-section
/// refinement around the best node. Endpoints are candidates in their own
/// right, so boundary maxima are returned exactly.
pub fn grid_then_golden_max<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    points: usize,
    x_tol: f64,
) -> f64 {
    if hi <= lo {
        return lo;
    }
    let points = points.max(3);
    let step = (hi - lo) / (points - 1) as f64;
    let node = |i: usize| {
        if i + 1 == points {
            hi
        } else {
            lo + step * i as f64
        }
    };
    let best = (0..points)
        .map(|i| (i, f(node(i))))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let a = node(best.saturating_sub(1));
    let b = node((best + 1).min(points - 1));
    let refined = golden_section_max(&f, a, b, x_tol);
    [lo, hi, refined]
        .into_iter()
        .max_by(|x, y| f(*x).total_cmp(&f(*y)))
        .expect("three candidates")
}
