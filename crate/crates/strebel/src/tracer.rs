//! Tracing of closed trajectories, component census and domain
//! classification.
//!
//! A trajectory is a level curve of u(z) = Σ α_i ln|z-a_i|. The tracer
//! integrates the unit tangent field i·conj(F)/|F| with an adaptive
//! Dormand-Prince 5(4) scheme and Newton-projects every accepted point back
//! onto the level set, so traced polylines satisfy the level to ~1e-13 and
//! the step controller only has to follow the geometry.

use crate::error::{Error, Result};
use crate::qd::QuadDifferential;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Tolerances and limits for curve tracing. All lengths are relative to the
/// configuration scale, so tracing is invariant under rescaling the plane.
#[derive(Debug, Clone)]
pub struct StepControl {
    /// Local error tolerance of the embedded RK pair (absolute, times scale).
    pub rk_tol: f64,
    /// Level-set projection target |u - ln λ|.
    pub project_tol: f64,
    /// Closure detection distance, times scale.
    pub closure_tol: f64,
    /// Hard cap on the step length, times scale.
    pub max_step_rel: f64,
    /// Arc-length budget, times configuration diameter.
    pub arc_limit_rel: f64,
    /// Minimal relative gap required between λ and every critical value.
    pub critical_margin: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rk_tol: 1e-10,
            project_tol: 1e-13,
            closure_tol: 1e-8,
            max_step_rel: 0.05,
            arc_limit_rel: 1e3,
            critical_margin: 1e-6,
        }
    }
}

/// An oriented closed trajectory: counterclockwise polyline on the level set
/// u = ln λ, with the enclosed pole indices and cumulative arc length.
#[derive(Debug, Clone)]
pub struct ClosedCurve {
    /// Vertices in counterclockwise order; the closing edge back to
    /// `points[0]` is implicit.
    pub points: Vec<Complex64>,
    /// Level λ of the trajectory (u = ln λ on the curve).
    pub level: f64,
    /// Sorted indices of the poles enclosed by the curve.
    pub enclosed_poles: Vec<usize>,
    /// Cumulative arc length at each vertex, starting at 0.
    pub arc_param: Vec<f64>,
}

impl ClosedCurve {
    /// Total arc length including the closing edge.
    pub fn total_arc(&self) -> f64 {
        let last = *self.arc_param.last().unwrap_or(&0.0);
        let closing = match (self.points.last(), self.points.first()) {
            (Some(a), Some(b)) => (a - b).norm(),
            _ => 0.0,
        };
        last + closing
    }

    /// Shoelace signed area; positive for counterclockwise orientation.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    /// Winding number of the polyline around `a` (a off the curve).
    pub fn winding_number(&self, a: Complex64) -> i32 {
        winding_number(&self.points, a)
    }

    pub fn contains(&self, a: Complex64) -> bool {
        self.winding_number(a) != 0
    }

    /// Axis-aligned extent of the curve, as (min corner, max corner).
    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        (lo, hi)
    }

    /// Brute-force simplicity check at the sampled resolution: no two
    /// non-adjacent segments intersect. Quadratic; intended for tests and
    /// verification runs.
    pub fn is_simple(&self) -> bool {
        let n = self.points.len();
        if n < 4 {
            return true;
        }
        let seg = |k: usize| (self.points[k], self.points[(k + 1) % n]);
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue; // adjacent through the closing edge
                }
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }
}

/// Configuration-domain kind of the component a trajectory lies in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainClass {
    /// Circle domain centered at ∞ (the curve encloses every pole).
    CircleAtInfinity,
    /// Circle domain centered at pole `j` (exactly one pole enclosed).
    CircleAtPole(usize),
    /// Ring domain; carries the sorted inner pole index set (1 < s < n).
    Ring(Vec<usize>),
}

/// One critical trajectory: starts at a zero and either reaches a zero or
/// closes on itself.
#[derive(Debug, Clone)]
pub struct CriticalEdge {
    pub points: Vec<Complex64>,
    /// Index into `CriticalGraph::vertices` of the launching zero.
    pub start_zero: usize,
    /// Terminal zero index; `None` only for closed loops.
    pub end_zero: Option<usize>,
    pub closed: bool,
}

/// Critical trajectories assembled into a graph on the zeros.
#[derive(Debug, Clone)]
pub struct CriticalGraph {
    pub vertices: Vec<Complex64>,
    pub multiplicities: Vec<usize>,
    pub edges: Vec<CriticalEdge>,
    pub component_count: usize,
}

fn signed_area(points: &[Complex64]) -> f64 {
    let n = points.len();
    let mut acc = 0.0;
    for k in 0..n {
        let p = points[k];
        let q = points[(k + 1) % n];
        acc += p.re * q.im - q.re * p.im;
    }
    0.5 * acc
}

fn winding_number(points: &[Complex64], a: Complex64) -> i32 {
    let n = points.len();
    let mut total = 0.0;
    for k in 0..n {
        let u = points[k] - a;
        let v = points[(k + 1) % n] - a;
        total += (v / u).arg();
    }
    let w = total / (2.0 * PI);
    if w >= 0.0 { (w + 0.5) as i32 } else { -((-w + 0.5) as i32) }
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Newton projection of `z` onto the level set u = `ln_level` along the
/// gradient direction conj(F)/|F|.
pub fn project_to_level(
    qd: &QuadDifferential,
    mut z: Complex64,
    ln_level: f64,
    tol: f64,
) -> Result<Complex64> {
    for _ in 0..50 {
        let g = qd.log_modulus(z)? - ln_level;
        if g.abs() <= tol {
            return Ok(z);
        }
        let f = qd.field_at(z)?;
        let f2 = f.norm_sqr();
        if f2 == 0.0 {
            return Err(Error::NearCriticalPoint { z, field: 0.0 });
        }
        z -= g * f.conj() / f2;
    }
    let g = qd.log_modulus(z)? - ln_level;
    if g.abs() <= tol * 100.0 {
        Ok(z)
    } else {
        Err(Error::SeedOffLevel { off: g.abs() })
    }
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One adaptive step of the tangent-field integration. Returns the proposal
/// and its embedded error estimate.
fn rk45_step<FieldFn>(field: &FieldFn, z: Complex64, h: f64) -> Result<(Complex64, f64)>
where
    FieldFn: Fn(Complex64) -> Result<Complex64>,
{
    let k1 = field(z)?;
    let k2 = field(z + h * (A2[0] * k1))?;
    let k3 = field(z + h * (A3[0] * k1 + A3[1] * k2))?;
    let k4 = field(z + h * (A4[0] * k1 + A4[1] * k2 + A4[2] * k3))?;
    let k5 = field(z + h * (A5[0] * k1 + A5[1] * k2 + A5[2] * k3 + A5[3] * k4))?;
    let k6 = field(z + h * (A6[0] * k1 + A6[1] * k2 + A6[2] * k3 + A6[3] * k4 + A6[4] * k5))?;
    let z5 = z + h * (B5[0] * k1 + B5[2] * k3 + B5[3] * k4 + B5[4] * k5 + B5[5] * k6);
    let k7 = field(z5)?;
    let err = h
        * (ERR[0] * k1 + ERR[2] * k3 + ERR[3] * k4 + ERR[4] * k5 + ERR[5] * k6 + ERR[6] * k7)
            .norm();
    Ok((z5, err))
}

struct TraceOutcome {
    points: Vec<Complex64>,
    closed: bool,
    hit_zero: Option<usize>,
}

struct TraceOpts<'a> {
    h0: f64,
    max_step: f64,
    rk_tol: f64,
    arc_limit: f64,
    closure_tol: f64,
    min_arc: f64,
    /// Terminate within `zero_radius` of any of these points (critical
    /// trajectories stop at zeros). Empty for plain level curves.
    stop_zeros: &'a [Complex64],
    zero_radius: f64,
}

/// Shared adaptive tracer for level curves and critical trajectories.
///
/// `field` must return a unit tangent; each step is additionally capped at a
/// quarter of the distance to the nearest pole so the polyline stays
/// isotopic to the true curve for winding-number purposes. Closure against
/// the start point is tested once the arc exceeds `min_arc`.
fn trace_field<FieldFn>(
    qd: &QuadDifferential,
    field: &FieldFn,
    start: Complex64,
    opts: &TraceOpts,
    project: &dyn Fn(Complex64) -> Result<Complex64>,
) -> Result<TraceOutcome>
where
    FieldFn: Fn(Complex64) -> Result<Complex64>,
{
    let mut z = start;
    let mut h = opts.h0.min(opts.max_step);
    let mut arc = 0.0;
    let mut points = vec![z];

    for _ in 0..4_000_000usize {
        if arc > opts.arc_limit {
            return Err(Error::NoClosure { arc_limit: opts.arc_limit });
        }
        let cap = (0.25 * nearest_pole_distance(qd, z)).min(opts.max_step);
        let dist_start = (z - start).norm();
        let mut step = h.min(cap).max(1e-300);
        if arc >= opts.min_arc && dist_start < 2.0 * step {
            // homing in on the start point
            step = (0.5 * dist_start).max(opts.closure_tol * 0.25);
        }

        let (proposal, err) = rk45_step(field, z, step)?;
        if err <= opts.rk_tol {
            let projected = project(proposal)?;
            arc += (projected - z).norm();
            z = projected;
            points.push(z);

            if !opts.stop_zeros.is_empty() && arc > opts.min_arc {
                if let Some((idx, _)) = opts
                    .stop_zeros
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| (i, (z - c).norm()))
                    .filter(|(_, d)| *d < opts.zero_radius)
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                {
                    return Ok(TraceOutcome { points, closed: false, hit_zero: Some(idx) });
                }
            }
            if arc >= opts.min_arc && (z - start).norm() <= opts.closure_tol {
                // drop a terminal point that nearly duplicates the start
                if points.len() > 2 && (z - start).norm() < 0.01 * (points[1] - start).norm() {
                    points.pop();
                }
                return Ok(TraceOutcome { points, closed: true, hit_zero: None });
            }
            h = (step * (opts.rk_tol / err.max(1e-300)).powf(0.2) * 0.9)
                .clamp(step * 0.2, step * 5.0);
        } else {
            h = step * (opts.rk_tol / err).powf(0.2) * 0.9;
            if h < 1e-300 {
                return Err(Error::StepUnderflow { z });
            }
        }
    }
    Err(Error::NoClosure { arc_limit: opts.arc_limit })
}

fn check_level_regular(qd: &QuadDifferential, level: f64, margin: f64) -> Result<()> {
    if !(level > 0.0) {
        return Err(Error::NonpositiveLevel(level));
    }
    let cs = qd.critical_set()?;
    for &w in &cs.values {
        if (level - w).abs() <= margin * w.max(level) {
            return Err(Error::NearCriticalLevel { level, critical: w, margin });
        }
    }
    Ok(())
}

/// Distance from `z` to the nearest pole of `qd`.
fn nearest_pole_distance(qd: &QuadDifferential, z: Complex64) -> f64 {
    qd.poles()
        .iter()
        .map(|&a| (z - a).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Trace the closed trajectory through `seed` on the level set u = ln λ.
///
/// The seed must already lie near the level set (|u - ln λ| ≤ 1e-6); it is
/// projected exactly before tracing. The result is normalized to
/// counterclockwise orientation with enclosed poles computed by winding.
pub fn trace_level_curve(
    qd: &QuadDifferential,
    seed: Complex64,
    level: f64,
    ctl: &StepControl,
) -> Result<ClosedCurve> {
    check_level_regular(qd, level, ctl.critical_margin)?;
    let ln_level = level.ln();
    let off = (qd.log_modulus(seed)? - ln_level).abs();
    if off > 1e-6 * ln_level.abs().max(1.0) {
        return Err(Error::SeedOffLevel { off });
    }
    let start = project_to_level(qd, seed, ln_level, ctl.project_tol)?;

    let scale = qd.diameter();
    let field_floor = 1e-8 / scale;
    let field = |z: Complex64| -> Result<Complex64> {
        let f = qd.field_at(z)?;
        let n = f.norm();
        if n < field_floor {
            return Err(Error::NearCriticalPoint { z, field: n });
        }
        Ok(Complex64::new(0.0, 1.0) * f.conj() / n)
    };
    let project = |z: Complex64| project_to_level(qd, z, ln_level, ctl.project_tol);

    let local = nearest_pole_distance(qd, start);
    let h0 = (0.01 * scale).min(0.2 * local).max(1e-12 * scale);
    let opts = TraceOpts {
        h0,
        max_step: ctl.max_step_rel * scale,
        rk_tol: ctl.rk_tol * scale,
        arc_limit: ctl.arc_limit_rel * scale,
        closure_tol: ctl.closure_tol * scale,
        min_arc: 10.0 * h0,
        stop_zeros: &[],
        zero_radius: 0.0,
    };
    let outcome = trace_field(qd, &field, start, &opts, &project)?;
    finish_closed_curve(qd, outcome, level)
}

fn finish_closed_curve(
    qd: &QuadDifferential,
    outcome: TraceOutcome,
    level: f64,
) -> Result<ClosedCurve> {
    let mut points = outcome.points;
    if signed_area(&points) < 0.0 {
        points.reverse();
    }
    let mut enclosed: Vec<usize> = Vec::new();
    for (i, &a) in qd.poles().iter().enumerate() {
        let w = winding_number(&points, a);
        if w.abs() >= 1 {
            enclosed.push(i);
        }
    }
    let mut arc_param = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    arc_param.push(0.0);
    for k in 1..points.len() {
        acc += (points[k] - points[k - 1]).norm();
        arc_param.push(acc);
    }
    Ok(ClosedCurve { points, level, enclosed_poles: enclosed, arc_param })
}

/// All components of the lemniscate at level λ.
///
/// Seeds come from eight rays per pole: every sign change of u - ln λ along
/// a ray is bisected to a crossing and traced; duplicates are removed by
/// enclosed-pole signature. Components are returned sorted by signature.
pub fn find_components(
    qd: &QuadDifferential,
    level: f64,
    ctl: &StepControl,
) -> Result<Vec<ClosedCurve>> {
    check_level_regular(qd, level, ctl.critical_margin)?;
    let ln_level = level.ln();
    let seeds = level_seeds(qd, level)?;
    let mut components: Vec<ClosedCurve> = Vec::new();
    for seed in seeds {
        let already = components.iter().any(|c| {
            // cheap rejection: seed on an existing curve
            c.points.iter().any(|p| (p - seed).norm() < 1e-7 * qd.diameter())
        });
        if already {
            continue;
        }
        let seed = project_to_level(qd, seed, ln_level, ctl.project_tol)?;
        let curve = trace_level_curve(qd, seed, level, ctl)?;
        if !components.iter().any(|c| c.enclosed_poles == curve.enclosed_poles) {
            components.push(curve);
        }
    }
    components.sort_by(|a, b| a.enclosed_poles.cmp(&b.enclosed_poles));
    Ok(components)
}

/// Radius beyond which |f| is guaranteed to exceed twice the level, so no
/// component reaches past it.
fn outer_radius_bound(qd: &QuadDifferential, level: f64) -> f64 {
    let c = qd.centroid();
    let spread = qd
        .poles()
        .iter()
        .map(|a| (a - c).norm())
        .fold(0.0f64, f64::max);
    let neg: f64 = qd.weights().iter().map(|w| (-w).max(0.0)).sum();
    let alpha = qd.alpha();
    let level_term = (2.0 * level).powf(1.0 / alpha) * 3.0f64.powf(neg / alpha);
    spread + level_term.max(2.0 * spread + 1.0).max(qd.diameter())
}

/// Seed points for `find_components`: bisected level crossings on rays from
/// every pole.
fn level_seeds(qd: &QuadDifferential, level: f64) -> Result<Vec<Complex64>> {
    let ln_level = level.ln();
    let diam = qd.diameter();
    let centroid = qd.centroid();
    let r_max = outer_radius_bound(qd, level) + (centroid.norm() + 1.0) * 0.0;
    let mut seeds = Vec::new();
    let samples = 600usize;

    for &a in qd.poles() {
        for k in 0..8 {
            let dir = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 8.0 + 0.1234);
            let r_lo = 1e-7 * diam;
            let r_hi = r_max + (a - centroid).norm() + diam;
            let g = |r: f64| -> Result<f64> { Ok(qd.log_modulus(a + r * dir)? - ln_level) };
            let mut prev_r = r_lo;
            let mut prev_g = g(prev_r)?;
            for m in 1..=samples {
                let t = m as f64 / samples as f64;
                let r = r_lo * (r_hi / r_lo).powf(t);
                let cur = g(r)?;
                if prev_g == 0.0 {
                    seeds.push(a + prev_r * dir);
                } else if prev_g.signum() != cur.signum() {
                    let (mut lo, mut hi, mut glo) = (prev_r, r, prev_g);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let gm = g(mid)?;
                        if gm == 0.0 {
                            lo = mid;
                            break;
                        }
                        if gm.signum() == glo.signum() {
                            lo = mid;
                            glo = gm;
                        } else {
                            hi = mid;
                        }
                    }
                    seeds.push(a + 0.5 * (lo + hi) * dir);
                }
                prev_r = r;
                prev_g = cur;
            }
        }
    }
    Ok(seeds)
}

/// Classify the configuration domain containing the curve. A single
/// enclosed pole wins over "all poles" in the one-pole configuration, so the
/// degenerate case is deterministic.
pub fn classify(curve: &ClosedCurve, qd: &QuadDifferential) -> DomainClass {
    let enclosed = &curve.enclosed_poles;
    if enclosed.len() == 1 {
        DomainClass::CircleAtPole(enclosed[0])
    } else if enclosed.len() == qd.len() {
        DomainClass::CircleAtInfinity
    } else {
        DomainClass::Ring(enclosed.clone())
    }
}

/// Trace every critical trajectory and assemble the critical graph.
///
/// From a zero of multiplicity m (as a root of the numerator polynomial) the
/// level set through the zero leaves along 2m+2 rays whose directions solve
/// Re(c·w^{m+1}) = 0 for the leading field coefficient c.
pub fn critical_graph(qd: &QuadDifferential, ctl: &StepControl) -> Result<CriticalGraph> {
    let cs = qd.critical_set()?;
    let distinct = cs.distinct();
    let vertices: Vec<Complex64> = distinct.iter().map(|(z, _)| *z).collect();
    let multiplicities: Vec<usize> = distinct.iter().map(|(_, m)| *m).collect();
    if vertices.is_empty() {
        return Ok(CriticalGraph {
            vertices,
            multiplicities,
            edges: Vec::new(),
            component_count: 0,
        });
    }

    let scale = qd.diameter();
    let zero_radius = 1e-6 * scale;
    let eps = 1e-5 * scale;
    let coeffs = qd.numerator_polynomial();

    let mut edges: Vec<CriticalEdge> = Vec::new();
    let mut parent: Vec<usize> = (0..vertices.len()).collect();

    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for (v_idx, (&z0, &m)) in vertices.iter().zip(&multiplicities).enumerate() {
        let ln_level = qd.log_modulus(z0)?;
        // leading coefficient of F at the zero: p^{(m)}(z0) / (m! Π(z0-a_i))
        let mut deriv = coeffs.clone();
        for _ in 0..m {
            deriv = differentiate(&deriv);
        }
        let pm = crate::roots::horner(&deriv, z0);
        let denom: Complex64 = qd.poles().iter().map(|&a| z0 - a).product();
        let c = pm / denom;
        let arg_c = c.arg();
        let rays = 2 * m + 2;
        for j in 0..rays {
            let phi = (PI / 2.0 - arg_c + j as f64 * PI) / (m as f64 + 1.0);
            let launch = z0 + Complex64::from_polar(eps, phi);
            let launch = match project_to_level(qd, launch, ln_level, ctl.project_tol) {
                Ok(p) => p,
                Err(_) => continue,
            };
            if (launch - z0).norm() < 0.5 * eps {
                continue; // projection fell back toward the zero
            }

            let field_floor = 1e-12 / scale;
            let field = |z: Complex64| -> Result<Complex64> {
                let f = qd.field_at(z)?;
                let n = f.norm();
                if n < field_floor {
                    return Err(Error::NearCriticalPoint { z, field: n });
                }
                Ok(Complex64::new(0.0, 1.0) * f.conj() / n)
            };
            let project = |z: Complex64| project_to_level(qd, z, ln_level, ctl.project_tol);
            let opts = TraceOpts {
                h0: 0.5 * eps,
                max_step: ctl.max_step_rel * scale,
                rk_tol: ctl.rk_tol * scale,
                arc_limit: ctl.arc_limit_rel * scale,
                closure_tol: ctl.closure_tol * scale,
                min_arc: 10.0 * eps,
                stop_zeros: &vertices,
                zero_radius,
            };
            let outcome = trace_field(qd, &field, launch, &opts, &project);
            let outcome = match outcome {
                Ok(o) => o,
                Err(Error::NoClosure { arc_limit }) => {
                    return Err(Error::TraceEscape { arc_limit })
                }
                Err(Error::NearCriticalPoint { .. }) => continue, // stalled at a zero
                Err(e) => return Err(e),
            };
            let end = outcome.hit_zero;
            let closed = outcome.closed;
            let mut pts = outcome.points;
            pts.insert(0, z0);
            if let Some(e) = end {
                pts.push(vertices[e]);
            } else if closed {
                // loop back to the launching zero
                pts.push(z0);
            }
            let edge = CriticalEdge { points: pts, start_zero: v_idx, end_zero: end, closed };
            if let Some(e) = end {
                let (ra, rb) = (find(&mut parent, v_idx), find(&mut parent, e));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
            if !is_duplicate_edge(&edges, &edge, 1e-3 * scale) {
                edges.push(edge);
            }
        }
    }

    let mut roots_seen: Vec<usize> = (0..vertices.len())
        .map(|v| find(&mut parent, v))
        .collect();
    roots_seen.sort_unstable();
    roots_seen.dedup();
    let component_count = roots_seen.len();

    Ok(CriticalGraph { vertices, multiplicities, edges, component_count })
}

fn differentiate(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

fn midpoint_of(points: &[Complex64]) -> Complex64 {
    points[points.len() / 2]
}

fn is_duplicate_edge(edges: &[CriticalEdge], cand: &CriticalEdge, tol: f64) -> bool {
    let cand_ends = edge_key(cand);
    let mid = midpoint_of(&cand.points);
    edges.iter().any(|e| {
        if edge_key(e) != cand_ends {
            return false;
        }
        // same endpoints: match if the candidate midpoint lies on e
        e.points.iter().any(|p| (p - mid).norm() < tol)
    })
}

fn edge_key(e: &CriticalEdge) -> (usize, usize) {
    let a = e.start_zero;
    let b = e.end_zero.unwrap_or(e.start_zero);
    (a.min(b), a.max(b))
}

/// Trace the steepest-descent (orthogonal trajectory) arc from `seed`: u
/// strictly decreases along the result. Terminates near a pole, near a zero
/// of the field, or at the arc limit; all are normal outcomes.
pub fn trace_orthogonal(
    qd: &QuadDifferential,
    seed: Complex64,
    arc_limit: f64,
    ctl: &StepControl,
) -> Result<Vec<Complex64>> {
    let scale = qd.diameter();
    let stop_radius = 1e-6 * scale;
    let field_floor = 1e-10 / scale;
    let mut z = seed;
    let mut h = (0.01 * scale).min(0.2 * nearest_pole_distance(qd, z));
    let mut arc = 0.0;
    let mut points = vec![z];

    let field = |z: Complex64| -> Result<Complex64> {
        let f = qd.field_at(z)?;
        let n = f.norm();
        if n < field_floor {
            return Err(Error::NearCriticalPoint { z, field: n });
        }
        Ok(-f.conj() / n)
    };

    for _ in 0..1_000_000usize {
        if arc >= arc_limit {
            break;
        }
        if nearest_pole_distance(qd, z) < stop_radius {
            break;
        }
        match qd.field_at(z) {
            Ok(f) if f.norm() < field_floor => break,
            Err(_) => break,
            _ => {}
        }
        let cap = (0.25 * nearest_pole_distance(qd, z)).max(1e-14 * scale);
        let step = h.min(cap).min(arc_limit - arc).max(1e-300);
        match rk45_step(&field, z, step) {
            Ok((proposal, err)) => {
                let accept_tol = 1e-10 * (1.0 + z.norm());
                if err <= accept_tol {
                    arc += (proposal - z).norm();
                    z = proposal;
                    points.push(z);
                    h = (step * (accept_tol / err.max(1e-300)).powf(0.2) * 0.9)
                        .clamp(step * 0.2, step * 5.0);
                } else {
                    h = step * (accept_tol / err).powf(0.2) * 0.9;
                    if h < 1e-300 {
                        break;
                    }
                }
            }
            Err(_) => break, // stepped into a pole/zero neighborhood
        }
    }
    Ok(points)
}
