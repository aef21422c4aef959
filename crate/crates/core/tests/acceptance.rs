//! Acceptance suite: one line per criterion, run with
//! `cargo test --test acceptance`.
//!
//! Criteria listed in `KNOWN_FAILURES` fail on mathematical grounds; they
//! still print FAIL, and the process only exits nonzero for unexpected
//! results (a new failure, or a known failure that starts passing).

use std::f64::consts::SQRT_2;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::Matrix6;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hermitian4::experiments::{
    self, random_one_form, trial_rng, FactorKind, FactorSpec, Family, FramePerturbation, PairKind, Scenario,
    ScenarioConfig,
};
use hermitian4::hodge::{asd_defect, d, hodge_decompose, norm, HodgeSolver, TripleField, TOL_PS};
use hermitian4::pointwise::{
    clifford_action, hodge_star_2, random, reconstruct_g, reconstruct_j, reconstruct_omega, rel_residual, unitary_frame,
    HermitianTriple, SpinorFiber,
};
use hermitian4::projgeom::{
    min_fixed_point_residual, real_point_candidates, real_points_on_real_line, CVec, ProjSubspace, RealStructure,
};

/// Junction degenerate rate and monotone norm gap; see the README.
const KNOWN_FAILURES: [u32; 2] = [5, 7];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn timed(id: u32, name: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (pass, detail) = f();
    Outcome { id, name, pass, detail, seconds: t.elapsed().as_secs_f64() }
}

fn crit1() -> Outcome {
    let t = Instant::now();
    let n = 16;
    let field = TripleField::standard(n).unwrap();
    let grid = field.grid();
    let omega = field.omega_cochain();
    let split = hodge_decompose(&omega, grid, 1e-8).unwrap();
    let solver = HodgeSolver::new(grid, 1e-8);
    let class = solver.class_of(&omega, TOL_PS).unwrap();
    let hn = solver.harmonic_norm(&omega).unwrap();
    let secs = t.elapsed().as_secs_f64();
    // ∫ over the coordinate 2-tori of e01 + e23
    let want = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
    let period_err = class.periods.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let exact = norm(grid, &split.exact).unwrap();
    let coexact = norm(grid, &split.coexact).unwrap();
    let harm_err = norm(grid, &(split.harmonic.clone() - omega.clone())).unwrap();
    let norm_err = (hn.value - SQRT_2).abs();
    let pass = exact < 1e-8
        && coexact < 1e-8
        && harm_err < 1e-8
        && period_err < 1e-8
        && norm_err < 1e-8
        && class.pseudo_symplectic
        && secs < 60.0;
    let detail = format!(
        "n=16 |exact| {exact:.1e}, |coexact| {coexact:.1e}, |w_H - w| {harm_err:.1e}, period err {period_err:.1e}, norm err {norm_err:.1e}, {secs:.1} s"
    );
    Outcome { id: 1, name: "flat symplectic baseline", pass, detail, seconds: secs }
}

/// Criteria 2 and 3 share the perturbed n=16 field.
fn crit2_3() -> (Outcome, Outcome) {
    let t = Instant::now();
    let p = FramePerturbation::from_seed(0, 0.1);
    let f8 = p.field(8).unwrap();
    let s8 = HodgeSolver::new(f8.grid(), 1e-8);
    let h8 = s8.harmonic_part(&f8.omega_cochain()).unwrap();
    let (asd8, _) = asd_defect(&h8, f8.grid()).unwrap();

    let f16 = p.field(16).unwrap();
    let s16 = HodgeSolver::new(f16.grid(), 1e-8);
    let omega = f16.omega_cochain();
    let h16 = s16.harmonic_part(&omega).unwrap();
    let (asd16, tot16) = asd_defect(&h16, f16.grid()).unwrap();
    let ratio = asd8 / asd16;
    let t3 = t.elapsed().as_secs_f64();
    let c3 = Outcome {
        id: 3,
        name: "self-duality of harmonic part",
        pass: (3.0..=5.0).contains(&ratio),
        detail: format!("eps=0.1 ASD defect n=8 {asd8:.3e}, n=16 {asd16:.3e} (of {tot16:.3}), ratio {ratio:.3}"),
        seconds: t3,
    };

    let t = Instant::now();
    let base = s16.class_of(&omega, TOL_PS).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let eta = random_one_form(&mut trial_rng(2, i), 16);
        let shifted = omega.clone() + d(&eta).unwrap();
        let class = s16.class_of(&shifted, TOL_PS).unwrap();
        let diff = base.periods.iter().zip(class.periods).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    let c2 = Outcome {
        id: 2,
        name: "exactness invariance",
        pass: worst < 1e-6,
        detail: format!("20 random eta on the eps=0.1 field at n=16, max period change {worst:.2e}"),
        seconds: t.elapsed().as_secs_f64(),
    };
    (c2, c3)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Clifford action of `ω` on `Λ^{0,*}` of `J′ = −J`, the structure whose
/// Kähler form `g(J′·,·)` is `ω`, built from exterior and interior products
/// in the unitary frame `(u₀, Ju₀, u₂, Ju₂)`. Basis `1, ε̄₁, ε̄₂, ε̄₁∧ε̄₂`.
fn clifford_oracle(t: &HermitianTriple) -> nalgebra::Matrix4<Complex64> {
    let frame = unitary_frame(t);
    let om = t.omega.to_matrix();
    let w = frame.transpose() * om * frame;
    type CM = nalgebra::Matrix4<Complex64>;
    // exterior products by ε̄₁ and ε̄₂
    let mut e1 = CM::zeros();
    e1[(1, 0)] = c(1.0, 0.0);
    e1[(3, 2)] = c(1.0, 0.0);
    let mut e2 = CM::zeros();
    e2[(2, 0)] = c(1.0, 0.0);
    e2[(3, 1)] = c(-1.0, 0.0);
    // (0,1)-parts for J′: u₀ ↦ ε̄₁/√2, Ju₀ ↦ −iε̄₁/√2, same on the second pair
    let parts = [(e1, c(1.0, 0.0)), (e1, c(0.0, -1.0)), (e2, c(1.0, 0.0)), (e2, c(0.0, -1.0))];
    let cl: Vec<CM> = parts
        .iter()
        .map(|(e, z)| {
            let ext = e * *z;
            ext - ext.adjoint()
        })
        .collect();
    let mut out = CM::zeros();
    for a in 0..4 {
        for b in a + 1..4 {
            out += cl[a] * cl[b] * c(w[(a, b)], 0.0);
        }
    }
    out
}

fn crit4() -> Outcome {
    timed(4, "pointwise algebra suite", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (mut rt, mut star_sq, mut typ, mut sd, mut cliff): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut dims_ok = true;
        for _ in 0..10_000 {
            let t = random::triple(&mut rng);
            let o = t.j.orientation();
            let w = reconstruct_omega(&t.g, &t.j).unwrap();
            let j = reconstruct_j(&t.g, &t.omega).unwrap();
            let g = reconstruct_g(&t.j, &t.omega).unwrap();
            rt = rt
                .max(rel_residual(&w.to_matrix(), &t.omega.to_matrix()))
                .max(rel_residual(j.matrix(), t.j.matrix()))
                .max(rel_residual(g.matrix(), t.g.matrix()));
            let s = hodge_star_2(&t.g, o).0;
            star_sq = star_sq.max((s * s - Matrix6::identity()).abs().max());
            let rank = |m: Matrix6<f64>| m.svd(false, false).singular_values.iter().filter(|&&x| x > 1e-9).count();
            dims_ok &= 6 - rank(s - Matrix6::identity()) == 3 && 6 - rank(s + Matrix6::identity()) == 3;
            let om = t.omega.to_matrix();
            let jm = t.j.matrix();
            typ = typ.max(rel_residual(&(jm.transpose() * om * jm), &om));
            sd = sd.max((s * t.omega.as_vector() - t.omega.as_vector()).abs().max());

            let m = clifford_oracle(&t);
            let a = clifford_action(&t, &SpinorFiber::new(c(1.0, 0.0), c(0.0, 0.0)));
            let b = clifford_action(&t, &SpinorFiber::new(c(0.0, 0.0), c(1.0, 0.0)));
            let even = [
                (m[(0, 0)] - c(0.0, -2.0)).norm(),
                (m[(3, 3)] - c(0.0, 2.0)).norm(),
                m[(0, 3)].norm(),
                m[(3, 0)].norm(),
                (a.alpha - m[(0, 0)]).norm() + a.beta.norm(),
                (b.beta - m[(3, 3)]).norm() + b.alpha.norm(),
            ];
            // ω is self-dual, so it acts trivially on Λ^{0,1}
            let odd = [m[(1, 1)].norm(), m[(1, 2)].norm(), m[(2, 1)].norm(), m[(2, 2)].norm()];
            cliff = cliff.max(even.into_iter().chain(odd).fold(0.0, f64::max));
        }
        let pass = rt < 1e-12 && star_sq < 1e-12 && dims_ok && typ < 1e-12 && sd < 1e-12 && cliff < 1e-12;
        let detail = format!(
            "1e4 triples: round trip {rt:.1e}, |**-1| {star_sq:.1e}, dims 3+3 {dims_ok}, (1,1) {typ:.1e}, *w-w {sd:.1e}, Clifford {cliff:.1e}"
        );
        (pass, detail)
    })
}

fn crit5() -> Outcome {
    timed(5, "junction", || {
        let mut cfg = ScenarioConfig::new(Scenario::Junction);
        cfg.seed = 42;
        cfg.generator.trials = Some(1000);
        cfg.generator.pairs = PairKind::Generic;
        let rep = experiments::run(&cfg).unwrap();
        let s = rep.record("summary").unwrap();
        let q = |k: &str| s.get(k).unwrap();
        let classified = q("other_errors") == 0.0;
        let certified = q("uncertified") == 0.0;
        let rate = q("degenerate_rate");
        let detail = format!(
            "1000 pairs seed 42: {} success, {} degenerate ({:.1}%, expected < 5%), all classified {classified}, worst certificate {:.1e}",
            q("success"),
            q("degenerate"),
            100.0 * rate,
            q("worst_certificate_residual")
        );
        (classified && certified && q("worst_certificate_residual") < 1e-8 && rate < 0.05, detail)
    })
}

fn crit6() -> Outcome {
    timed(6, "real-structure dichotomy", || {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let std = RealStructure::standard(3);
        let quat = RealStructure::quaternionic(3).unwrap();
        let rand_vec = |rng: &mut ChaCha8Rng| CVec::from_fn(4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let (mut two, mut none) = (0, 0);
        let mut min_quat_res = f64::INFINITY;
        for _ in 0..1000 {
            let z = rand_vec(&mut rng);
            let line = ProjSubspace::from_vectors(&[z.clone(), std.apply_vec(&z)]).unwrap();
            if let Ok((a, b)) = real_points_on_real_line(&line, &std) {
                if std.is_fixed(&a) && std.is_fixed(&b) && a.distance(&b) > 1e-3 && line.contains_point(&a) && line.contains_point(&b) {
                    two += 1;
                }
            }
            let z = rand_vec(&mut rng);
            let qline = ProjSubspace::from_vectors(&[z.clone(), quat.apply_vec(&z)]).unwrap();
            let res = min_fixed_point_residual(&qline, &quat, 24);
            min_quat_res = min_quat_res.min(res);
            if quat.is_invariant(&qline) && real_point_candidates(&qline, &quat).is_empty() && res > 1e-3 {
                none += 1;
            }
        }
        let detail = format!(
            "standard: {two}/1000 lines with 2 real points; quaternionic: {none}/1000 with none (min |p - Theta p| {min_quat_res:.3})"
        );
        (two == 1000 && none == 1000, detail)
    })
}

fn crit7() -> Outcome {
    timed(7, "norm invariance", || {
        let gap = |n: usize| {
            let mut cfg = ScenarioConfig::new(Scenario::NormInvariance);
            cfg.n = n;
            cfg.generator.epsilon = 0.05;
            cfg.generator.volume_preserving = true;
            let rep = experiments::run(&cfg).unwrap();
            rep.record("norms").unwrap().get("relative_gap").unwrap()
        };
        let (g8, g16) = (gap(8), gap(16));
        let detail = format!(
            "eps=0.05 gap n=8 {g8:.3e}, n=16 {g16:.3e}: < 1e-2 {}, decreasing {}",
            g16 < 1e-2,
            g16 < g8
        );
        (g16 < 1e-2 && g16 < g8, detail)
    })
}

fn crit8() -> Outcome {
    timed(8, "conformal stability", || {
        let mut cfg = ScenarioConfig::new(Scenario::Conformal);
        cfg.seed = 8;
        cfg.generator.family = Family::Perturbed;
        cfg.generator.epsilon = 0.1;
        cfg.generator.factor = FactorSpec { kind: FactorKind::Random, amplitude: 1.0 };
        cfg.generator.trials = Some(20);
        cfg.tolerances.positivity = 1e-6;
        let rep = experiments::run(&cfg).unwrap();
        let mut worst_margin = f64::INFINITY;
        let mut min_value = f64::INFINITY;
        let mut ok = rep.records.len() == 20;
        for r in &rep.records {
            let (v, b) = (r.get("value").unwrap(), r.get("bound").unwrap());
            ok &= v > 0.0 && v >= b - 1e-6;
            worst_margin = worst_margin.min(v - b);
            min_value = min_value.min(v);
        }
        (ok, format!("20 random f (max |f| = 1) on the eps=0.1 field, n=8: min value {min_value:.4}, min value - bound {worst_margin:.4}"))
    })
}

fn crit9() -> Outcome {
    timed(9, "closedness diagnostic", || {
        let mut cfg = ScenarioConfig::new(Scenario::Closedness);
        cfg.n = 8;
        cfg.generator.interpolation = vec![0.0, 1.0];
        cfg.generator.factor = FactorSpec { kind: FactorKind::Bump, amplitude: 1.0 };
        let rep = experiments::run(&cfg).unwrap();
        let r0 = rep.record("t=0").unwrap();
        let r1 = rep.record("t=1").unwrap();
        let s0 = r0.get("dstar_omega_n").unwrap().max(r0.get("dstar_omega_2n").unwrap());
        let (a, b) = (r1.get("dstar_omega_n").unwrap(), r1.get("dstar_omega_2n").unwrap());
        let stable = (0.5..=2.0).contains(&(a / b));
        let pass = s0 < 1e-8 && a > 1e-2 && b > 1e-2 && stable;
        (pass, format!("|d*w| symplectic {s0:.1e}; non-closed n=8 {a:.3}, n=16 {b:.3} (ratio {:.3})", a / b))
    })
}

fn crit10() -> Outcome {
    timed(10, "determinism", || {
        let mut tau = ScenarioConfig::new(Scenario::Tau);
        tau.generator.family = Family::Perturbed;
        let mut junction = ScenarioConfig::new(Scenario::Junction);
        junction.seed = 42;
        junction.generator.trials = Some(200);
        let mut conformal = ScenarioConfig::new(Scenario::Conformal);
        conformal.generator.factor.kind = FactorKind::Random;
        conformal.generator.trials = Some(3);
        let mut same = 0;
        for cfg in [&tau, &junction, &conformal] {
            let a = experiments::run(cfg).unwrap().to_json().unwrap();
            let b = experiments::run(cfg).unwrap().to_json().unwrap();
            same += usize::from(a == b);
        }

        // through the binary
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("junction.toml");
        std::fs::write(&cfg_path, junction.to_toml()).unwrap();
        let mut files = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("run{k}"));
            let status = Command::new(env!("CARGO_BIN_EXE_hermitian4"))
                .args(["junction", "--config"])
                .arg(&cfg_path)
                .arg("--out")
                .arg(&out)
                .output()
                .unwrap()
                .status;
            files.push((status.code(), std::fs::read(out.join("junction.json")).unwrap_or_default()));
        }
        let cli_same = files[0].0 == Some(0) && !files[0].1.is_empty() && files[0] == files[1];
        (same == 3 && cli_same, format!("{same}/3 library reports identical, CLI JSON identical {cli_same}"))
    })
}

fn main() -> ExitCode {
    let mut outcomes = vec![crit1()];
    let (c2, c3) = crit2_3();
    outcomes.extend([c2, c3, crit4(), crit5(), crit6(), crit7(), crit8(), crit9(), crit10()]);
    outcomes.sort_by_key(|o| o.id);
    let mut unexpected = 0;
    for o in &outcomes {
        let known = KNOWN_FAILURES.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (unexpected)",
        };
        if o.pass == known {
            unexpected += 1;
        }
        println!("criterion {:>2} {:<30} {tag}: {} [{:.1} s]", o.id, o.name, o.detail, o.seconds);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} passed, {unexpected} unexpected", outcomes.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
