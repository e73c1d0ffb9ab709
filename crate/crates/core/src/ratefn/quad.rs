//! Adaptive Simpson quadrature with Richardson correction.

use thiserror::Error;

use super::EvalError;

/// Deepest bisection level before giving up on an interval.
pub const MAX_DEPTH: u32 = 48;
/// Hard cap on integrand evaluations per call.
pub const MAX_EVALS: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },

    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),

    #[error("integrand failed at t = {t}: {source}")]
    Integrand {
        t: f64,
        #[source]
        source: EvalError,
    },

    #[error(
        "no convergence on [{t0}, {t1}]: stuck on [{a}, {b}] at depth {depth}, \
         estimated error {estimated_error:e} after {evaluations} evaluations"
    )]
    NotConverged {
        t0: f64,
        t1: f64,
        a: f64,
        b: f64,
        depth: u32,
        estimated_error: f64,
        evaluations: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the per-panel `|S₂ - S₁| / 15` estimates.
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Ctx<'a, F> {
    f: &'a mut F,
    evals: usize,
    t0: f64,
    t1: f64,
}

impl<F: FnMut(f64) -> Result<f64, EvalError>> Ctx<'_, F> {
    fn eval(&mut self, t: f64) -> Result<f64, QuadratureError> {
        self.evals += 1;
        (self.f)(t).map_err(|source| QuadratureError::Integrand { t, source })
    }
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn refine<F: FnMut(f64) -> Result<f64, EvalError>>(
    ctx: &mut Ctx<'_, F>,
    p: Panel,
    tol: f64,
    depth: u32,
) -> Result<(f64, f64), QuadratureError> {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = ctx.eval(lm)?;
    let frm = ctx.eval(rm)?;
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let both = left + right;
    let delta = both - p.whole;
    let err = delta.abs() / 15.0;
    // Tolerances below the rounding level of the panel value are unreachable.
    let floor = 4.0 * f64::EPSILON * both.abs();
    if err <= tol.max(floor) {
        return Ok((both + delta / 15.0, err));
    }
    if depth >= MAX_DEPTH || ctx.evals >= MAX_EVALS || m <= p.a || m >= p.b {
        return Err(QuadratureError::NotConverged {
            t0: ctx.t0,
            t1: ctx.t1,
            a: p.a,
            b: p.b,
            depth,
            estimated_error: err,
            evaluations: ctx.evals,
        });
    }
    let (lv, le) = refine(
        ctx,
        Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
        },
        0.5 * tol,
        depth + 1,
    )?;
    let (rv, re) = refine(
        ctx,
        Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        },
        0.5 * tol,
        depth + 1,
    )?;
    Ok((lv + rv, le + re))
}

/// Integrates `f` over `[t0, t1]` to an estimated absolute error of `tol`.
///
/// The interval is first split into four panels so that integrands whose
/// Simpson estimate happens to agree at the coarsest level still get probed.
pub fn adaptive_simpson<F>(mut f: F, t0: f64, t1: f64, tol: f64) -> Result<Quadrature, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(QuadratureError::InvalidInterval { t0, t1 });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(QuadratureError::InvalidTolerance(tol));
    }
    if t1 == t0 {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let mut ctx = Ctx {
        f: &mut f,
        evals: 0,
        t0,
        t1,
    };
    const PANELS: usize = 4;
    let h = (t1 - t0) / PANELS as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut fa = ctx.eval(t0)?;
    for i in 0..PANELS {
        let a = t0 + h * i as f64;
        let b = if i + 1 == PANELS { t1 } else { t0 + h * (i + 1) as f64 };
        let fm = ctx.eval(0.5 * (a + b))?;
        let fb = ctx.eval(b)?;
        let panel = Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole: simpson(a, b, fa, fm, fb),
        };
        let (v, e) = refine(&mut ctx, panel, tol / PANELS as f64, 0)?;
        value += v;
        error += e;
        fa = fb;
    }
    Ok(Quadrature {
        value,
        error_estimate: error,
        evaluations: ctx.evals,
    })
}
