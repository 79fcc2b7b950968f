use lossy_walk_cli::{format_g12, Cell, SweepRow, Table};
use proptest::prelude::*;

fn close12(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-11 * a.abs().max(b.abs())
}

fn same_row(a: &SweepRow, b: &SweepRow) -> bool {
    let opt = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => close12(x, y),
        (None, None) => true,
        _ => false,
    };
    close12(a.v, b.v)
        && opt(a.p_imb, b.p_imb)
        && opt(a.p_1, b.p_1)
        && opt(a.p_l, b.p_l)
        && opt(a.residual, b.residual)
        && a.edge_state_count == b.edge_state_count
        && opt(a.bloch_w, b.bloch_w)
        && a.nonbloch_w == b.nonbloch_w
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3f64..1e3, -1e-9f64..1e-9, Just(0.0), Just(0.5), (-300i32..300).prop_map(|e| 1.234_567_890_123_4 * 10f64.powi(e))]
}

fn sweep_row() -> impl Strategy<Value = SweepRow> {
    (
        finite(),
        proptest::option::of(finite()),
        proptest::option::of(0.0f64..1.0),
        proptest::option::of(0.0f64..1.0),
        proptest::option::of(0.0f64..1e-8),
        proptest::option::of(0usize..4),
        proptest::option::of(prop_oneof![Just(0.0), Just(0.5), Just(1.0)]),
        proptest::option::of(0i32..2),
    )
        .prop_map(|(v, p_imb, p_1, p_l, residual, edge_state_count, bloch_w, nonbloch_w)| SweepRow {
            v,
            p_imb,
            p_1,
            p_l,
            residual,
            edge_state_count,
            bloch_w,
            nonbloch_w,
        })
}

#[test]
fn one_row_has_eight_columns_in_declared_order() {
    let row = SweepRow {
        v: 0.3,
        p_imb: Some(0.146),
        p_1: Some(0.146),
        p_l: Some(1e-20),
        residual: Some(9.9e-9),
        edge_state_count: Some(2),
        bloch_w: Some(0.5),
        nonbloch_w: Some(1),
    };
    let csv = String::from_utf8(SweepRow::table(&[row]).to_csv()).unwrap();
    assert_eq!(csv, "v,P_imb,P_1,P_L,residual,edge_state_count,bloch_w,nonbloch_w\n0.3,0.146,0.146,1e-20,9.9e-09,2,0.5,1\n");
}

#[test]
fn missing_values_are_empty_fields() {
    let row = SweepRow { v: 0.25, p_imb: None, p_1: None, p_l: None, residual: None, edge_state_count: None, bloch_w: None, nonbloch_w: Some(1) };
    let csv = String::from_utf8(SweepRow::table(&[row]).to_csv()).unwrap();
    assert!(csv.ends_with("0.25,,,,,,,1\n"), "{csv}");
}

proptest! {
    #[test]
    fn sweep_rows_round_trip(rows in proptest::collection::vec(sweep_row(), 0..20)) {
        let table = SweepRow::table(&rows);
        for parsed in [Table::from_csv(&table.to_csv()).unwrap(), Table::from_json(&table.to_json()).unwrap()] {
            prop_assert_eq!(parsed.rows.len(), rows.len());
            if !rows.is_empty() {
                prop_assert_eq!(&parsed.columns, &table.columns);
            }
            for (cells, want) in parsed.rows.iter().zip(&rows) {
                let got = SweepRow::from_cells(cells).unwrap();
                prop_assert!(same_row(&got, want), "{:?} vs {:?}", got, want);
            }
        }
    }

    #[test]
    fn g12_is_stable_and_precise(x in finite()) {
        let s = format_g12(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!(close12(back, x), "{} -> {}", x, s);
        prop_assert_eq!(format_g12(back), s.clone());
        prop_assert!(!s.contains(' ') && !s.contains(','));
        let mut t = Table::new(["x"]);
        t.push(vec![Cell::Float(x)]);
        prop_assert_eq!(t.to_csv(), format!("x\n{s}\n").into_bytes());
    }
}
