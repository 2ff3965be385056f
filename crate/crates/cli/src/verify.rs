//! The one-shot verification harness behind `locham verify`.
//!
//! Each suite reruns a condensed version of the library's acceptance
//! identities and reports one named check per identity; checks are merged
//! deterministically by name.

use num_complex::Complex64;

use locham_core::asymptotics::{branch_integral_limit, profile_derivative_limit};
use locham_core::distributions::{partial_dist, sector_dist, sector_dist_direct};
use locham_core::iet::{keane_check, IetSpec};
use locham_core::jets::factorial;
use locham_core::special::{beta_like_rat, binom_real};
use locham_core::{ComplexJet, QuadSpec, Rational64, SaddleModel};

use crate::UsageError;

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub err: f64,
    pub tolerance: f64,
}

pub struct Summary {
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Summary {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "version": crate::VERSION,
            "suite": self.suite,
            "checks": self.checks.iter().map(|c| serde_json::json!({
                "name": c.name,
                "pass": c.pass,
                "err": c.err,
                "tolerance": c.tolerance,
            })).collect::<Vec<_>>(),
            "pass": self.pass,
        })
    }
}

fn check(out: &mut Vec<Check>, name: &str, err: f64, tolerance: f64) {
    out.push(Check {
        name: name.to_string(),
        pass: err <= tolerance,
        err,
        tolerance,
    });
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn beta_suite(out: &mut Vec<Check>) {
    let mut conj_err = 0.0f64;
    let mut shift_err = 0.0f64;
    let mut refl_err = 0.0f64;
    let mut sum1_err = 0.0f64;
    for m in 2..=6i64 {
        let range = (3 * m) / 2;
        for p in -range..=range {
            for q in -range..=range {
                let x = Rational64::new(p, m);
                let y = Rational64::new(q, m);
                let xf = p as f64 / m as f64;
                let yf = q as f64 / m as f64;
                let bxy = beta_like_rat(x, y);
                let byx = beta_like_rat(y, x);
                conj_err = conj_err.max((byx - bxy.conj()).norm());
                if x + y == Rational64::from_integer(1) {
                    let expect =
                        c(1.0, 0.0) + Complex64::from_polar(1.0, std::f64::consts::PI * (yf - xf));
                    sum1_err = sum1_err.max((bxy - expect).norm());
                }
                if x.is_integer() || y.is_integer() {
                    continue;
                }
                let low = (x + y).is_integer() && x + y <= Rational64::from_integer(1);
                let two_i = c(0.0, 2.0);
                for n in 1..=6u32 {
                    if !low
                        || x + y + Rational64::from_integer(n as i64) <= Rational64::from_integer(2)
                    {
                        let lhs = two_i.powu(n)
                            * binom_real(-yf, n)
                            * beta_like_rat(x, y + Rational64::from_integer(n as i64));
                        let mid = binom_real(xf + yf + n as f64 - 2.0, n) * bxy;
                        let rhs = (-two_i).powu(n)
                            * binom_real(-xf, n)
                            * beta_like_rat(x + Rational64::from_integer(n as i64), y);
                        shift_err = shift_err.max((lhs - mid).norm()).max((rhs - mid).norm());
                    }
                    let refl_l = binom_real(-xf, n)
                        * beta_like_rat(
                            x + Rational64::from_integer(n as i64),
                            y - Rational64::from_integer(n as i64),
                        );
                    let refl_r =
                        if n % 2 == 0 { 1.0 } else { -1.0 } * binom_real(-yf + n as f64, n) * bxy;
                    refl_err = refl_err.max((refl_l - refl_r).norm());
                }
            }
        }
    }
    check(out, "beta/conjugation", conj_err, 1e-12);
    check(out, "beta/shift", shift_err, 1e-12);
    check(out, "beta/reflection", refl_err, 1e-12);
    check(out, "beta/argument-sum-one", sum1_err, 1e-12);
}

fn dist_suite(out: &mut Vec<Check>) {
    // dual formula on a deterministic corpus
    let mut dual_err = 0.0f64;
    let mut parity_err = 0.0f64;
    for trial in 0..50u64 {
        let m = 2 + (trial % 4) as u32;
        let k = (trial % 9) as u32;
        let mut state = trial.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(1);
        let mut jet = ComplexJet::zero(10);
        for t in 0..=10usize {
            for i in 0..=t {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let re = (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let im = (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
                jet.set(i, t - i, c(re, im)).unwrap();
            }
        }
        let vals: Vec<Complex64> = (0..2 * m)
            .map(|l| sector_dist(&jet, m, k, l).unwrap())
            .collect();
        let scale = vals.iter().map(|v| v.norm()).fold(1e-12, f64::max);
        for l in 0..2 * m {
            let direct = sector_dist_direct(&jet, m, k, l).unwrap();
            dual_err = dual_err.max((vals[l as usize] - direct).norm() / scale);
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for l in 0..m as usize {
            parity_err = parity_err.max((vals[l + m as usize] - vals[l] * sign).norm() / scale);
        }
    }
    check(out, "dist/dual-formula", dual_err, 1e-10);
    check(out, "dist/parity", parity_err, 1e-12);

    // exact duality on the passive slot
    let mut exact_err = 0.0f64;
    for m in 2..=5u32 {
        for k in (m - 1)..=10 {
            let p = ComplexJet::monomial(m as usize - 1, (k - (m - 1)) as usize);
            let v = partial_dist(&p, m, k, m - 1).unwrap();
            exact_err = exact_err.max((v - c(factorial(k as usize), 0.0)).norm());
        }
    }
    check(out, "dist/passive-slot-factorial", exact_err, 0.0);
}

fn limits_suite(out: &mut Vec<Check>) {
    let spec = QuadSpec::deep();
    let rep = branch_integral_limit(2, 0, 2, 2, &spec).unwrap();
    check(
        out,
        "limits/g-weighted-m2",
        rep.plus.rel_err.max(rep.minus.rel_err),
        1e-3,
    );

    let one = ComplexJet::constant(c(1.0, 0.0), 0);
    let rep = profile_derivative_limit(&one, 2, 0, 0, 0, &spec).unwrap();
    let err = (rep.estimate - c(-2.0, 0.0)).norm() / 2.0;
    check(out, "limits/profile-m2-constant", err, 5e-3);
}

fn iet_suite(out: &mut Vec<Check>) {
    let golden =
        IetSpec::parse("labels: A B\npi0: A B\npi1: B A\nlambda: (3-sqrt(5))/2 (-1+sqrt(5))/2")
            .unwrap();
    check(
        out,
        "iet/keane-golden",
        if keane_check(&golden, 10_000) {
            0.0
        } else {
            1.0
        },
        0.0,
    );
    let rational = IetSpec::parse("labels: A B\npi0: A B\npi1: B A\nlambda: 3/7 4/7").unwrap();
    check(
        out,
        "iet/keane-rational-rejected",
        if keane_check(&rational, 7) { 1.0 } else { 0.0 },
        0.0,
    );
}

fn flow_suite(out: &mut Vec<Check>) {
    let saddle = SaddleModel::new(2, ComplexJet::constant(c(1.0, 0.0), 4), 0.75).unwrap();
    let f = ComplexJet::monomial(1, 0).extend_to(4);
    let s = 0.1 * saddle.epsilon;
    let tr = locham_core::flow::transit(&saddle, 0, s, &f, 1e-11, false).unwrap();
    let quad =
        locham_core::flow::transit_profile_value(&saddle, 0, s, &f, &QuadSpec::default()).unwrap();
    let rel = (tr.integral - quad).norm() / quad.norm().max(1e-14);
    check(out, "flow/transit-identity", rel, 1e-6);
    check(out, "flow/hamiltonian-drift", tr.hamiltonian_drift, 1e-9);
}

pub fn run_suite(suite: &str) -> Result<Summary, UsageError> {
    let mut checks = Vec::new();
    match suite {
        "beta" => beta_suite(&mut checks),
        "dist" => dist_suite(&mut checks),
        "limits" => limits_suite(&mut checks),
        "iet" => iet_suite(&mut checks),
        "flow" => flow_suite(&mut checks),
        "all" => {
            beta_suite(&mut checks);
            dist_suite(&mut checks);
            limits_suite(&mut checks);
            iet_suite(&mut checks);
            flow_suite(&mut checks);
        }
        other => {
            return Err(UsageError(format!(
                "unknown suite `{other}` (beta | dist | limits | iet | flow | all)"
            )))
        }
    }
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let pass = checks.iter().all(|ch| ch.pass);
    Ok(Summary {
        suite: suite.to_string(),
        checks,
        pass,
    })
}
