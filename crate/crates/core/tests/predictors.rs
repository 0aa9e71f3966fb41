//! Worked examples and golden fixtures for the rank-growth predictors.

use std::path::PathBuf;

use iwasawa_core::predictors::{
    anticyclotomic_parity_check, bdp_order_lower_bound, growth_sequence, local_mw_prediction, mw_tate_prediction,
    predict, question_report, total_rank, GrowthKind, GrowthSequence, PredictInput, Prediction, RankKind, RankTable,
    RootNumber, SettingTag,
};
use iwasawa_core::Error;
use serde_json::Value;

fn seq(kind: GrowthKind, values: &[u64]) -> GrowthSequence {
    GrowthSequence::new(5, kind, values.to_vec()).unwrap()
}

fn golden() -> Vec<Value> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/predict_golden.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["cases"].as_array().unwrap().clone()
}

#[test]
fn growth_sequence_examples() {
    let z = RankTable::new(5, RankKind::Z, vec![2, 6, 26]).unwrap();
    assert_eq!(growth_sequence(&z, GrowthKind::E).unwrap().values, vec![2, 1, 1]);
    let o = RankTable::new(5, RankKind::O, vec![1, 1, 1]).unwrap();
    assert_eq!(growth_sequence(&o, GrowthKind::F).unwrap().values, vec![1, 0, 0]);
    let err = RankTable::new(5, RankKind::Z, vec![0, 3]).unwrap_err();
    assert_eq!(err.to_string(), "level 1: jump 3 not divisible by 4");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn growth_kind_must_match_rank_kind() {
    let z = RankTable::new(5, RankKind::Z, vec![2, 6]).unwrap();
    assert!(matches!(growth_sequence(&z, GrowthKind::F), Err(Error::Setting { .. })));
}

#[test]
fn rank_o_converter_halves_even_tables() {
    let z = RankTable::new(5, RankKind::Z, vec![2, 10, 50]).unwrap();
    assert_eq!(z.to_rank_o().unwrap().values, vec![1, 5, 25]);
    let odd = RankTable::new(5, RankKind::Z, vec![1, 5]).unwrap();
    assert!(matches!(odd.to_rank_o(), Err(Error::InvalidRankTable { level: 0, .. })));
}

#[test]
fn predict_examples() {
    let p = predict(SettingTag::CMInertCyc, &seq(GrowthKind::F, &[2, 1, 0])).unwrap();
    assert_eq!(p.prediction, Prediction::Factors(vec![(0, 1), (1, 0), (2, 0)]));
    assert_eq!(p.char_ideal, "Φ_0^1");

    let p = predict(SettingTag::CMSplitCyc, &seq(GrowthKind::E, &[3, 2, 0])).unwrap();
    assert_eq!(p.prediction, Prediction::Factors(vec![(0, 4), (1, 2), (2, 0)]));

    let p = predict(SettingTag::HeegnerFine, &seq(GrowthKind::E, &[3, 1, 2])).unwrap();
    assert_eq!(p.prediction, Prediction::Intervals(vec![(0, 1, 2), (1, 0, 0), (2, 0, 1)]));

    let p = predict(SettingTag::HeegnerBDP, &seq(GrowthKind::E, &[3, 2, 1])).unwrap();
    assert_eq!(p.prediction, Prediction::Factors(vec![(0, 2), (1, 1), (2, 0)]));
}

#[test]
fn bdp_needs_positive_growth() {
    let err = predict(SettingTag::HeegnerBDP, &seq(GrowthKind::E, &[2, 0])).unwrap_err();
    assert!(matches!(err, Error::Hypothesis { .. }));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn every_setting_reports_its_object_and_ring() {
    for tag in SettingTag::ALL {
        let s = seq(tag.growth_kind(), &[2, 1]);
        let p = predict(tag, &s).unwrap();
        assert_eq!(p.object, tag.object());
        assert_eq!(p.ring, tag.ring());
        assert_eq!(SettingTag::parse(tag.name(), None).unwrap(), tag);
    }
}

#[test]
fn split_anticyclotomic_needs_a_root_number() {
    assert!(SettingTag::parse("cm_split_anticyc", None).is_err());
    assert_eq!(
        SettingTag::parse("cm_split_anticyc", Some(RootNumber::Minus)).unwrap(),
        SettingTag::CMSplitAnticycRootMinus
    );
    assert!(SettingTag::parse("cm_split_anticyc_root_plus", Some(RootNumber::Minus)).is_err());
}

#[test]
fn mw_tate_examples() {
    assert_eq!(mw_tate_prediction(&seq(GrowthKind::E, &[2, 1]), 1).unwrap(), vec![(0, 2), (1, 1)]);
    assert!(mw_tate_prediction(&seq(GrowthKind::E, &[0]), 0).unwrap().is_empty());
}

#[test]
fn local_mw_examples() {
    assert_eq!(local_mw_prediction(1, 1, 2).unwrap(), vec![(0, 1), (1, 1), (2, 1)]);
    assert_eq!(local_mw_prediction(1, 2, 1).unwrap(), vec![(0, 2), (1, 2)]);
    let three = local_mw_prediction(1, 1, 3).unwrap();
    assert!(three.iter().all(|&(_, m)| m == 1));
    assert_eq!(total_rank(5, &three), 125);
}

#[test]
fn bdp_bound_examples() {
    let cases = [(1, "0", 0), (2, "1/2", 1), (3, "1", 1), (4, "3/2", 2)];
    for (e, rational, ceiling) in cases {
        let b = bdp_order_lower_bound(e).unwrap();
        assert_eq!(b.rational(), rational, "e = {e}");
        assert_eq!(b.ceiling, ceiling, "e = {e}");
    }
    assert!(bdp_order_lower_bound(0).is_err());
}

#[test]
fn question_examples() {
    let q2 = question_report(SettingTag::CMInertAnticyc, &seq(GrowthKind::F, &[1, 1, 0, 1])).unwrap();
    assert_eq!(q2.question, 2);
    assert_eq!(q2.conjectural.char_ideal, "1");

    let q4 = question_report(SettingTag::CMSplitCyc, &seq(GrowthKind::E, &[2, 2])).unwrap();
    assert_eq!(q4.question, 4);
    assert_eq!(q4.conjectural.char_ideal, "Φ_0^2 · Φ_1^2");

    let q6 = question_report(SettingTag::HeegnerFine, &seq(GrowthKind::E, &[3])).unwrap();
    assert_eq!(q6.question, 6);
    assert_eq!(q6.conjectural.char_ideal, "Φ_0^{1..2}");
    let v = serde_json::to_value(&q6).unwrap();
    assert!(v.get("PROVEN").is_some() && v.get("CONJECTURAL").is_some());
}

#[test]
fn parity_examples() {
    let ok = anticyclotomic_parity_check(&seq(GrowthKind::F, &[2, 0, 1, 0, 1]));
    assert!(ok.pass && !ok.degenerate);
    assert_eq!(ok.parity.as_deref(), Some("odd"));
    assert_eq!(ok.growth_parity.as_deref(), Some("even"));

    let bad = anticyclotomic_parity_check(&seq(GrowthKind::F, &[1, 1, 1, 1]));
    assert!(!bad.pass);

    let flat = anticyclotomic_parity_check(&seq(GrowthKind::F, &[0, 0, 0]));
    assert!(flat.pass && flat.degenerate);
}

#[test]
fn golden_fixtures() {
    let cases = golden();
    for tag in SettingTag::ALL {
        let count = cases
            .iter()
            .filter(|c| {
                let input: PredictInput = serde_json::from_value(c["input"].clone()).unwrap();
                input.resolve().map(|(t, _)| t == tag).unwrap_or(false)
            })
            .count();
        assert!(count >= 3, "{} has {count} fixtures", tag.name());
    }
    for case in &cases {
        let name = case["name"].as_str().unwrap();
        let input: PredictInput = serde_json::from_value(case["input"].clone()).unwrap();
        let expect = &case["expect"];
        match input.run() {
            Ok(out) => {
                let v = serde_json::to_value(&out).unwrap();
                assert_eq!(v["growth"], expect["growth"], "{name}");
                assert_eq!(v["char_ideal"], expect["char_ideal"], "{name}");
                let key = if expect.get("factors").is_some() { "factors" } else { "intervals" };
                assert_eq!(v["prediction"][key], expect[key], "{name}");
            }
            Err(e) => assert_eq!(Some(e.exit_code() as u64), expect["exit"].as_u64(), "{name}: {e}"),
        }
    }
}
