//! Direct integration of the local Hamiltonian flow near a perfect saddle
//! and the transit-integral identity connecting orbit integrals to the
//! return profile.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::{ComplexJet, SaddleModel};
use crate::quad::QuadSpec;
use crate::sector::{partial_return_integral, return_profile, root_branch};

/// A recorded orbit piece: times, points and the observed invariant drift
/// `max |Im(z^m) - Im(z_0^m)|`.
#[derive(Debug, Clone)]
pub struct OrbitSegment {
    pub times: Vec<f64>,
    pub points: Vec<Complex64>,
    pub hamiltonian_drift: f64,
}

impl OrbitSegment {
    /// CSV rows `t, re z, im z`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re_z,im_z\n");
        for (t, z) in self.times.iter().zip(&self.points) {
            out.push_str(&format!("{t:?},{:?},{:?}\n", z.re, z.im));
        }
        out
    }
}

/// Result of a transit through one angular sector.
#[derive(Debug, Clone)]
pub struct Transit {
    pub tau: f64,
    pub integral: Complex64,
    pub entry: Complex64,
    pub exit: Complex64,
    pub hamiltonian_drift: f64,
    pub orbit: Option<OrbitSegment>,
}

/// The local vector field `m conj(z)^(m-1) / V(z)`.
pub fn vector_field(saddle: &SaddleModel, z: Complex64) -> Result<Complex64> {
    let v = saddle.v_jet.eval(z);
    if v.norm() < 1e-12 {
        return Err(Error::DensityVanishes);
    }
    Ok(z.conj().powu(saddle.m - 1) * (saddle.m as f64) / v)
}

// Dormand-Prince 5(4) coefficients.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Augmented state: position and the running observable integral.
#[derive(Debug, Clone, Copy)]
struct State {
    z: Complex64,
    acc: Complex64,
}

impl State {
    fn axpy(&self, c: f64, d: &Deriv) -> State {
        State {
            z: self.z + d.dz * c,
            acc: self.acc + d.dacc * c,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Deriv {
    dz: Complex64,
    dacc: Complex64,
}

fn rhs(saddle: &SaddleModel, f: &ComplexJet, st: &State) -> Result<Deriv> {
    Ok(Deriv {
        dz: vector_field(saddle, st.z)?,
        dacc: f.eval(st.z),
    })
}

/// One embedded step of size `h`: the 5th-order state and the 5(4) error
/// estimate.
fn dp_step(saddle: &SaddleModel, f: &ComplexJet, st: &State, h: f64) -> Result<(State, f64)> {
    let k1 = rhs(saddle, f, st)?;
    let k2 = rhs(saddle, f, &st.axpy(h * A2[0], &k1))?;
    let s3 = st.axpy(h * A3[0], &k1).axpy(h * A3[1], &k2);
    let k3 = rhs(saddle, f, &s3)?;
    let s4 = st
        .axpy(h * A4[0], &k1)
        .axpy(h * A4[1], &k2)
        .axpy(h * A4[2], &k3);
    let k4 = rhs(saddle, f, &s4)?;
    let s5 = st
        .axpy(h * A5[0], &k1)
        .axpy(h * A5[1], &k2)
        .axpy(h * A5[2], &k3)
        .axpy(h * A5[3], &k4);
    let k5 = rhs(saddle, f, &s5)?;
    let s6 = st
        .axpy(h * A6[0], &k1)
        .axpy(h * A6[1], &k2)
        .axpy(h * A6[2], &k3)
        .axpy(h * A6[3], &k4)
        .axpy(h * A6[4], &k5);
    let k6 = rhs(saddle, f, &s6)?;
    let ks = [&k1, &k2, &k3, &k4, &k5, &k6];
    let mut y5 = *st;
    let mut y4 = *st;
    for (i, k) in ks.iter().enumerate() {
        y5 = y5.axpy(h * B5[i], k);
        y4 = y4.axpy(h * B4[i], k);
    }
    let k7 = rhs(saddle, f, &y5)?;
    y4 = y4.axpy(h * B4[6], &k7);
    let err = ((y5.z - y4.z).norm_sqr() + (y5.acc - y4.acc).norm_sqr()).sqrt();
    Ok((y5, err))
}

struct Integration {
    state: State,
    t: f64,
    drift: f64,
    orbit: Option<OrbitSegment>,
}

/// Integrate forward until `Re(z^m)` reaches `target_u`, with adaptive steps
/// and bisection event location.
fn integrate_to_u(
    saddle: &SaddleModel,
    f: &ComplexJet,
    start: Complex64,
    target_u: f64,
    tol: f64,
    record: bool,
) -> Result<Integration> {
    let m = saddle.m;
    let event = |z: Complex64| z.powu(m).re - target_u;
    let speed0 = vector_field(saddle, start)?.norm();
    if speed0 == 0.0 {
        return Err(Error::NoExit);
    }
    let mut st = State {
        z: start,
        acc: Complex64::new(0.0, 0.0),
    };
    let mut t = 0.0f64;
    let mut h = (0.01 / speed0).min(0.1);
    let h0 = start.powu(m).im;
    let mut drift: f64 = 0.0;
    let mut orbit = record.then(|| OrbitSegment {
        times: vec![0.0],
        points: vec![start],
        hamiltonian_drift: 0.0,
    });
    let max_steps = 2_000_000usize;

    for _ in 0..max_steps {
        let (next, err) = dp_step(saddle, f, &st, h)?;
        let scale = tol * (1.0 + st.z.norm() + st.acc.norm());
        if err > scale {
            h *= (0.9 * (scale / err).powf(0.2)).max(0.2);
            continue;
        }
        if event(next.z) >= 0.0 {
            // bisect the step size down to the crossing
            let mut lo = 0.0f64;
            let mut hi = h;
            let mut hit = next;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let (cand, _) = dp_step(saddle, f, &st, mid)?;
                if event(cand.z) >= 0.0 {
                    hi = mid;
                    hit = cand;
                } else {
                    lo = mid;
                }
            }
            t += hi;
            drift = drift.max((hit.z.powu(m).im - h0).abs());
            if let Some(o) = orbit.as_mut() {
                o.times.push(t);
                o.points.push(hit.z);
                o.hamiltonian_drift = drift;
            }
            return Ok(Integration {
                state: hit,
                t,
                drift,
                orbit,
            });
        }
        st = next;
        t += h;
        drift = drift.max((st.z.powu(m).im - h0).abs());
        if let Some(o) = orbit.as_mut() {
            o.times.push(t);
            o.points.push(st.z);
            o.hamiltonian_drift = drift;
        }
        if err > 0.0 {
            h *= (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0);
        } else {
            h *= 2.0;
        }
    }
    Err(Error::NoExit)
}

/// Near-saddle fallback: reparametrize by the chart coordinate `u` of
/// `z^m = u - i s`, along which the motion is a straight line, so that the
/// diverging transit time cannot collapse the steps.
fn integrate_u_chart(
    saddle: &SaddleModel,
    f: &ComplexJet,
    l: u32,
    s: f64,
    target_u: f64,
    spec: &QuadSpec,
) -> Result<(f64, Complex64)> {
    let m = saddle.m;
    let eps = saddle.epsilon;
    let mf = m as f64;
    // dt/du = V / (m^2 (u^2+s^2)^((m-1)/m)); dI/du = f V / (same)
    let tau_kernel = move |v: f64| {
        let z = root_branch(m, l, Complex64::new(v, -s)).expect("off origin");
        let w = (v * v + s * s).powf(-(mf - 1.0) / mf) / (mf * mf);
        saddle.v_jet.eval(z) * w
    };
    let int_kernel = move |v: f64| {
        let z = root_branch(m, l, Complex64::new(v, -s)).expect("off origin");
        let w = (v * v + s * s).powf(-(mf - 1.0) / mf) / (mf * mf);
        f.eval(z) * saddle.v_jet.eval(z) * w
    };
    let tau = crate::quad::singular_peak(&tau_kernel, -eps, target_u, s.abs(), spec);
    let acc = crate::quad::singular_peak(&int_kernel, -eps, target_u, s.abs(), spec);
    Ok((tau.value.re, acc.value))
}

/// Transit of the orbit entering sector `l` at `G_l(-eps - i s)` until it
/// exits at `Re(z^m) = eps`: the transit time and the accumulated integral
/// of the observable along the orbit.
pub fn transit(
    saddle: &SaddleModel,
    l: u32,
    s: f64,
    f: &ComplexJet,
    tol: f64,
    record_orbit: bool,
) -> Result<Transit> {
    let eps = saddle.epsilon;
    if !(s != 0.0 && s.abs() <= eps) {
        return Err(Error::Domain(format!(
            "s = {s} must lie in [-eps, eps] minus 0"
        )));
    }
    if l >= saddle.m {
        return Err(Error::OutOfRange(format!("l = {l} must be < m")));
    }
    let entry = root_branch(saddle.m, l, Complex64::new(-eps, -s))?;
    if s.abs() / eps < 1e-4 {
        let spec = QuadSpec {
            abs_tol: tol,
            rel_tol: tol,
            ..QuadSpec::default()
        };
        let (tau, integral) = integrate_u_chart(saddle, f, l, s, eps, &spec)?;
        let exit = root_branch(saddle.m, l, Complex64::new(eps, -s))?;
        return Ok(Transit {
            tau,
            integral,
            entry,
            exit,
            hamiltonian_drift: 0.0,
            orbit: None,
        });
    }
    let run = integrate_to_u(saddle, f, entry, eps, tol, record_orbit)?;
    Ok(Transit {
        tau: run.t,
        integral: run.state.acc,
        entry,
        exit: run.state.z,
        hamiltonian_drift: run.drift,
        orbit: run.orbit,
    })
}

/// The quadrature side of the transit identity:
/// `eps^(-(m-2)/m) / m^2` times the return profile of the product jet
/// rescaled by `eps^(1/m)`, evaluated at `-s/eps`.
pub fn transit_profile_value(
    saddle: &SaddleModel,
    l: u32,
    s: f64,
    f: &ComplexJet,
    spec: &QuadSpec,
) -> Result<Complex64> {
    let eps = saddle.epsilon;
    let m = saddle.m as f64;
    let scaled = f.product(&saddle.v_jet).rescale(eps.powf(1.0 / m));
    let phi = return_profile(&scaled, saddle.m, l, -s / eps, spec)?;
    Ok(phi * eps.powf(-(m - 2.0) / m) / (m * m))
}

/// Comparison report for the interior-point identity.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub ode_value: Complex64,
    pub quad_value: Complex64,
    pub rel_err: f64,
}

/// Partial transit to an interior point `w` of the open sector cell against
/// the partial return integral at `z = w^m`, both sides scaled per the
/// chart radius.
pub fn interior_point_identity(
    saddle: &SaddleModel,
    l: u32,
    w: Complex64,
    f: &ComplexJet,
    tol: f64,
) -> Result<IdentityReport> {
    let eps = saddle.epsilon;
    let m = saddle.m;
    let mf = m as f64;
    let z = w.powu(m);
    let (u, s) = (z.re, -z.im);
    if !(u.abs() < eps && s != 0.0 && s.abs() < eps) {
        return Err(Error::Domain(
            "w must lie strictly inside the open sector cell".into(),
        ));
    }
    let entry = root_branch(m, l, Complex64::new(-eps, -s))?;
    let run = integrate_to_u(saddle, f, entry, u, tol, false)?;
    if (run.state.z - w).norm() > 1e-6 * w.norm() {
        return Err(Error::Domain(format!(
            "w = {w} does not lie on the entry orbit of sector {l} (reached {})",
            run.state.z
        )));
    }
    let spec = QuadSpec {
        abs_tol: tol.min(1e-11),
        rel_tol: tol.min(1e-11),
        ..QuadSpec::default()
    };
    let scaled = f.product(&saddle.v_jet).rescale(eps.powf(1.0 / mf));
    let script_f = partial_return_integral(&scaled, m, l, u / eps, -s / eps, &spec)?;
    let quad_value = script_f * eps.powf(-(mf - 2.0) / mf) / (mf * mf);
    let ode_value = run.state.acc;
    let rel_err = (ode_value - quad_value).norm() / quad_value.norm().max(1e-14);
    Ok(IdentityReport {
        ode_value,
        quad_value,
        rel_err,
    })
}
