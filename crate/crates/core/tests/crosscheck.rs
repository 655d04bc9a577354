use poisson_audit_core::flat::{
    length_spectrum_flat, validate, BieberbachGroup, FlatLengthEntry, ValidationReport,
};
use poisson_audit_core::lens::{length_spectrum, LengthKind, LengthSpectrumEntry, LensSpace};
use poisson_audit_core::oracle::hiprec;
use poisson_audit_core::oracle::{laplace_multiplicities, laplace_multiplicities_float};
use poisson_audit_core::wavetrace::{
    cancellation_decision, cancellation_search, decide_lens, leading_sum, search_exponents,
    Decision, SearchReport, WaveTermSum,
};

fn lenses(n: usize, q_max: u32) -> Vec<LensSpace> {
    (3..=q_max)
        .flat_map(|q| search_exponents(q, n).into_iter().map(move |p| (q, p)))
        .map(|(q, p)| LensSpace::new(q, &p).unwrap())
        .collect()
}

#[test]
fn exact_decisions_match_high_precision() {
    let mut family = lenses(2, 24);
    family.extend(lenses(3, 13));
    for lens in family {
        for (sum, decision) in decide_lens(&lens).unwrap() {
            let stripped = hiprec::stripped_sum(&sum);
            assert_eq!(
                decision == Decision::Zero,
                hiprec::is_negligible(&stripped),
                "{lens} tau={}",
                sum.tau
            );
            let f = sum.float_sum();
            let h = hiprec::to_f64(&stripped);
            assert_eq!(f > 0.0, h > 0.0, "{lens}");
        }
    }
}

#[test]
fn iterates_repeat_the_primitive_decision() {
    for lens in lenses(3, 12) {
        for entry in length_spectrum(&lens, 2.0 * lens.period()) {
            if let LengthKind::Short { l, winding: 1 } = entry.kind {
                let base = length_spectrum(&lens, lens.period())
                    .into_iter()
                    .find(|e| e.kind == LengthKind::Short { l, winding: 0 })
                    .unwrap();
                let a = cancellation_decision(&leading_sum(&lens, &entry).unwrap());
                let b = cancellation_decision(&leading_sum(&lens, &base).unwrap());
                assert_eq!(a, b, "{lens} l={l}");
            }
        }
    }
}

#[test]
fn character_average_agrees_with_counting() {
    for (q, p) in [
        (5u32, vec![1i64, 2]),
        (12, vec![1, 5, 7]),
        (9, vec![1, 1, 1, 2]),
    ] {
        let exact = laplace_multiplicities(q, &p, 60).unwrap();
        let float = laplace_multiplicities_float(q, &p, 60).unwrap();
        assert_eq!(exact.multiplicities, float);
    }
}

#[test]
fn reports_round_trip_through_json() {
    let lens = LensSpace::new(7, &[3, 1, 2]).unwrap();
    let text = serde_json::to_string(&lens).unwrap();
    assert_eq!(serde_json::from_str::<LensSpace>(&text).unwrap(), lens);

    for entry in length_spectrum(&lens, 2.0 * lens.period()) {
        let text = serde_json::to_string(&entry).unwrap();
        assert_eq!(
            serde_json::from_str::<LengthSpectrumEntry>(&text).unwrap(),
            entry
        );
        let sum = leading_sum(&lens, &entry).unwrap();
        let text = serde_json::to_string(&sum).unwrap();
        assert_eq!(serde_json::from_str::<WaveTermSum>(&text).unwrap(), sum);
    }

    let report = cancellation_search(2, 3, 11, false).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    assert_eq!(serde_json::from_str::<SearchReport>(&text).unwrap(), report);

    let g = BieberbachGroup::hantzsche_wendt();
    let v = validate(&g);
    let text = serde_json::to_string(&v).unwrap();
    assert_eq!(serde_json::from_str::<ValidationReport>(&text).unwrap(), v);
    let spectrum = length_spectrum_flat(&g, 2.0).unwrap();
    let text = serde_json::to_string(&spectrum).unwrap();
    assert_eq!(
        serde_json::from_str::<Vec<FlatLengthEntry>>(&text).unwrap(),
        spectrum
    );
}
