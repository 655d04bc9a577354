//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! runtime against its budget. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use poisson_audit_core::exactnum::is_prime;
use poisson_audit_core::flat::{
    brute_force_spectrum, class_counts, cleanliness_diagnostic, length_spectrum_flat,
    BieberbachGroup,
};
use poisson_audit_core::lens::{components, LengthKind, LengthSpectrumEntry, LensSpace};
use poisson_audit_core::morse::index_short;
use poisson_audit_core::oracle::{
    cleanliness_check, jacobi_propagator, laplace_multiplicities, laplace_multiplicities_float,
    numeric_dg, peak_report, required_cutoff, sample_point, PeakThresholds,
};
use poisson_audit_core::wavetrace::{
    cancellation_search, dg_scalar, leading_sum, lemma_check, search_exponents, Decision,
};
use poisson_audit_core::Result;

const DG_TOL: f64 = 1e-9;
const BLOCK_TOL: f64 = 1e-10;
const CLEAN_SAMPLES: usize = 10;
const TRACE_GRID: usize = 420;
const TRACE_EPSILONS: [f64; 3] = [0.05, 0.03, 0.02];
const FLAT_MAX: f64 = 3.0;
const BRUTE_RADIUS: i64 = 5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

/// Every lens space `L(q; 1, p_2, ..)` with `3 <= q <= 11`, `n <= 3`, up to
/// isometry.
fn family() -> Vec<LensSpace> {
    (3..=11)
        .flat_map(|q| {
            (2..=3).flat_map(move |n| search_exponents(q, n).into_iter().map(move |p| (q, p)))
        })
        .map(|(q, p)| LensSpace::new(q, &p).expect("valid"))
        .collect()
}

fn short_entry(lens: &LensSpace, l: u32, winding: u32) -> Result<LengthSpectrumEntry> {
    let comps = components(lens, l, winding)?;
    Ok(LengthSpectrumEntry {
        tau: comps[0].tau,
        kind: LengthKind::Short { l, winding },
        components: comps,
    })
}

fn lemma() -> Result<Outcome> {
    let mut checks = 0;
    let mut bad = Vec::new();
    for q in (3..=31).filter(|&q| is_prime(q)) {
        for p in 1..q as i64 {
            let mut all = true;
            for l in 1..q {
                all &= lemma_check(q, p, l)?;
                checks += 1;
            }
            let expected = p == 1 || p == q as i64 - 1;
            if all != expected {
                bad.push(format!("q={q} p={p}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checks} identities, mismatches: {bad:?}"),
    )
}

fn theorem() -> Result<Outcome> {
    let r = cancellation_search(2, 3, 47, true)?;
    outcome(
        r.findings.is_empty(),
        format!(
            "{} lens spaces, {} lengths, {} ZERO findings",
            r.lenses_examined,
            r.lengths_examined,
            r.findings.len()
        ),
    )
}

fn systole() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut comps = 0;
    let mut bad = Vec::new();
    for _ in 0..200 {
        let q: u32 = rng.gen_range(3..=50);
        let n: usize = rng.gen_range(2..=4);
        let units: Vec<i64> = (1..q as i64)
            .filter(|&a| num_integer::gcd(a, q as i64) == 1)
            .collect();
        let p: Vec<i64> = (0..n)
            .map(|_| units[rng.gen_range(0..units.len())])
            .collect();
        let lens = LensSpace::new(q, &p)?;
        let entry = short_entry(&lens, 1, 0)?;
        let indices: Vec<u32> = entry
            .components
            .iter()
            .map(|c| index_short(&lens, c).map(|b| b.total))
            .collect::<Result<_>>()?;
        comps += indices.len();
        let sum = leading_sum(&lens, &entry)?;
        let positive = sum.terms.iter().all(|t| t.sign > 0);
        let decision = poisson_audit_core::wavetrace::cancellation_decision(&sum);
        if indices.iter().any(|&i| i != 0) || !positive || decision != Decision::Nonzero {
            bad.push(format!("{lens}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("200 lens spaces, {comps} components; failures: {bad:?}"),
    )
}

fn homogeneous() -> Result<Outcome> {
    let mut lengths = 0;
    let mut bad = Vec::new();
    for q in 3..=30 {
        for n in 2..=4 {
            let lens = LensSpace::homogeneous(q, n)?;
            for winding in 0..=1 {
                for l in 1..=lens.max_l() {
                    let entry = short_entry(&lens, l, winding)?;
                    let sum = leading_sum(&lens, &entry)?;
                    let d = poisson_audit_core::wavetrace::cancellation_decision(&sum);
                    let ok = entry.components.len() == 2
                        && sum.terms.len() == 2
                        && sum.terms[0].morse_index == sum.terms[1].morse_index
                        && sum.terms[0].sign == sum.terms[1].sign
                        && sum.terms[0].amplitude_float == sum.terms[1].amplitude_float
                        && d == Decision::Nonzero;
                    lengths += 1;
                    if !ok {
                        bad.push(format!("{lens} l={l} w={winding}"));
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{lengths} lengths; failures: {bad:?}"),
    )
}

fn density() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for lens in family() {
        for winding in 0..=1 {
            for l in 1..=lens.max_l() {
                for c in components(&lens, l, winding)? {
                    let exact = dg_scalar(&lens, &c)?.float_value;
                    let num = numeric_dg(&lens, &c, 7)?;
                    worst = worst.max((num - exact).abs() / exact);
                    count += 1;
                }
            }
        }
    }
    outcome(
        worst < DG_TOL,
        format!("{count} components, max rel. error {worst:.2e} (tol {DG_TOL:.0e})"),
    )
}

fn block_determinant() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut blocks = 0;
    for lens in family() {
        for winding in 0..=1 {
            for l in 1..=lens.max_l() {
                for c in components(&lens, l, winding)? {
                    let k = c.effective_k(&lens) as i64;
                    let x = sample_point(&lens, &c, &mut rng);
                    let f = jacobi_propagator(&lens, &c, &x)?;
                    for i in (0..lens.n()).filter(|i| !c.members.contains(i)) {
                        let th = 2.0 * PI * (k * lens.p()[i] as i64) as f64 / lens.q() as f64;
                        let expect = 4.0 * (th.cos() - f.tau.cos()).powi(2);
                        worst = worst.max((f.block_determinant(i) - expect).abs());
                        blocks += 1;
                    }
                }
            }
        }
    }
    outcome(
        worst < BLOCK_TOL,
        format!("{blocks} blocks, max abs. error {worst:.2e} (tol {BLOCK_TOL:.0e})"),
    )
}

fn cleanliness() -> Result<Outcome> {
    let mut comps = 0;
    let mut bad = Vec::new();
    for lens in family() {
        for l in 1..=lens.max_l() {
            for (i, c) in components(&lens, l, 0)?.iter().enumerate() {
                let r = cleanliness_check(&lens, c, CLEAN_SAMPLES, 100 + i as u64)?;
                comps += 1;
                if !r.pass {
                    bad.push(format!("{lens} l={l} class {}", c.class_index));
                }
            }
        }
    }
    let mut flat_entries = 0;
    for (name, g) in [
        ("Z^2", BieberbachGroup::torus(2)),
        ("Z^3", BieberbachGroup::torus(3)),
        ("Klein", BieberbachGroup::klein_bottle()),
        ("Hantzsche-Wendt", BieberbachGroup::hantzsche_wendt()),
    ] {
        for e in length_spectrum_flat(&g, FLAT_MAX)? {
            flat_entries += 1;
            if !cleanliness_diagnostic(&g, &e).pass {
                bad.push(format!("{name} length^2 {}", e.length_squared));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{comps} lens components x {CLEAN_SAMPLES} samples, {flat_entries} flat lengths; failures: {bad:?}"
        ),
    )
}

fn trace_peaks() -> Result<Outcome> {
    let cutoff = required_cutoff(2, TRACE_EPSILONS[2]);
    let mut details = Vec::new();
    let mut pass = true;
    for q in [5u32, 7] {
        let table = laplace_multiplicities(q, &[1, 2], cutoff)?;
        let predicted: Vec<f64> = (1..=q).map(|l| 2.0 * PI * l as f64 / q as f64).collect();
        let r = peak_report(
            &table,
            &predicted,
            &TRACE_EPSILONS,
            TRACE_GRID,
            PeakThresholds::default(),
        )?;
        let failed = r.entries.iter().filter(|e| !e.pass).count();
        pass &= r.pass;
        details.push(format!(
            "L({q};1,2): {} checks, {failed} failed",
            r.entries.len()
        ));
    }
    outcome(
        pass,
        format!("K={cutoff}, G={TRACE_GRID}; {}", details.join("; ")),
    )
}

fn flat_oracle() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut lengths = 0;
    for (name, g) in [
        ("Z^2", BieberbachGroup::torus(2)),
        ("Klein", BieberbachGroup::klein_bottle()),
        ("Hantzsche-Wendt", BieberbachGroup::hantzsche_wendt()),
    ] {
        let fast = class_counts(&length_spectrum_flat(&g, FLAT_MAX)?);
        let brute = brute_force_spectrum(&g, FLAT_MAX, BRUTE_RADIUS)?;
        lengths += fast.len();
        if fast != brute {
            bad.push(name);
        }
    }
    outcome(
        bad.is_empty(),
        format!("{lengths} exact squared lengths; mismatches: {bad:?}"),
    )
}

fn multiplicities() -> Result<Outcome> {
    const K: usize = 2000;
    let mut tables = 0;
    let mut bad = Vec::new();
    for q in 1..=50u32 {
        let mut exps: Vec<Vec<i64>> = if q >= 3 {
            search_exponents(q, 2)
        } else {
            vec![vec![1, 1]]
        };
        exps.push(vec![1, 1, 1]);
        exps.push(vec![1, 1, 1, 1]);
        for p in exps {
            let t = laplace_multiplicities(q, &p, K)?;
            tables += 1;
            if t.multiplicities[0] != 1 {
                bad.push(format!("q={q} p={p:?}: m0"));
            }
            if p.len() == 2 {
                let float = laplace_multiplicities_float(q, &p, 300)?;
                if float[..] != t.multiplicities[..=300] {
                    bad.push(format!("q={q} p={p:?}: character average"));
                }
            }
        }
    }
    let m1 = laplace_multiplicities(5, &[1, 2], 1)?.multiplicities[1];
    outcome(
        bad.is_empty() && m1 == 0,
        format!("{tables} tables to K={K}; L(5;1,2) m1={m1}; failures: {bad:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, u64, fn() -> Result<Outcome>); 10] = [
        (1, "lemma reproduction", 10, lemma),
        (2, "n=2 cancellation search", 60, theorem),
        (3, "systole criterion", 30, systole),
        (4, "homogeneous criterion", 30, homogeneous),
        (5, "density cross-check", 60, density),
        (6, "block determinant", 30, block_determinant),
        (7, "cleanliness", 60, cleanliness),
        (8, "wave-trace peaks", 300, trace_peaks),
        (9, "flat spectrum oracle", 30, flat_oracle),
        (10, "multiplicity sanity", 60, multiplicities),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} #{id:<2} {name:<26} {:>7.2}s / {budget}s  {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
        );
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
