use crate::error::{Error, Result};

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights for the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[lo, hi]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate falls below `opts.abs_tol`. Nodes are interior, so integrable
/// endpoint singularities and jump discontinuities at the ends are tolerated.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Quadrature {
            lo,
            hi,
            tolerance: opts.abs_tol,
            estimate: f64::INFINITY,
        });
    }
    if hi < lo {
        let r = integrate(f, hi, lo, opts)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }

    let mut segments = vec![kronrod15(&f, lo, hi)];
    let mut evaluations = 15;
    loop {
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= opts.abs_tol {
            break;
        }
        if segments.len() >= opts.max_subdivisions {
            return Err(Error::Quadrature {
                lo,
                hi,
                tolerance: opts.abs_tol,
                estimate: error,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // Interval can no longer be split in floating point.
            return Err(Error::Quadrature {
                lo,
                hi,
                tolerance: opts.abs_tol,
                estimate: error,
            });
        }
        segments.push(kronrod15(&f, seg.lo, mid));
        segments.push(kronrod15(&f, mid, seg.hi));
        evaluations += 30;
    }

    // Sum in interval order so the result does not depend on refinement order.
    segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    Ok(QuadResult {
        value: segments.iter().map(|s| s.value).sum(),
        error_estimate: segments.iter().map(|s| s.error).sum(),
        evaluations,
    })
}

/// Integrates over `[lo, hi]` split at every breakpoint strictly inside it.
/// The tolerance budget is shared evenly between the pieces.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    let mut knots: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots.insert(0, lo);
    knots.push(hi);

    let pieces = knots.len() - 1;
    let piece_opts = QuadOptions {
        abs_tol: opts.abs_tol / pieces as f64,
        ..opts
    };
    let mut total = QuadResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    for w in knots.windows(2) {
        let r = integrate(&f, w[0], w[1], piece_opts)?;
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.evaluations += r.evaluations;
    }
    Ok(total)
}
