mod common;

use common::*;
use gridlambda_core::engine::{parse_workbook, EngineError};
use gridlambda_core::{ErrorKind, Scalar, Workbook};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kind(s: &Scalar) -> Option<ErrorKind> {
    s.as_error().map(|e| e.kind)
}

#[test]
fn edit_dirties_cell_and_dependents() {
    let mut wb = book(&[("A1", "1"), ("B1", "=A1*2"), ("C1", "=B1+1"), ("D1", "7")], &[]);
    let a1 = addr(&wb, "A1");
    let dirty = wb.set_input(a1, "5").unwrap();
    for cell in ["A1", "B1", "C1"] {
        assert!(dirty.contains(&addr(&wb, cell)), "{cell} should be dirty");
    }
    assert!(!dirty.contains(&addr(&wb, "D1")));
    wb.recalculate();
    assert_eq!(at(&wb, "C1"), n(11.0));
}

#[test]
fn sequence_spills_down() {
    let wb = book(&[("A1", "=SEQUENCE(3)")], &[]);
    let region = wb.spill_region(addr(&wb, "A1")).unwrap();
    assert_eq!((region.rows, region.cols), (3, 1));
    for (cell, v) in [("A1", 1.0), ("A2", 2.0), ("A3", 3.0)] {
        assert_eq!(at(&wb, cell), n(v));
    }
}

#[test]
fn blocked_spill_then_unblocked() {
    let mut wb = book(&[("A1", "=SEQUENCE(3)"), ("A3", "x")], &[]);
    let a1 = addr(&wb, "A1");
    let err = at(&wb, "A1");
    assert_eq!(kind(&err), Some(ErrorKind::Spill));
    assert!(err.as_error().unwrap().detail.as_deref().unwrap_or("").contains("A3"));
    assert_eq!(at(&wb, "A2"), Scalar::Empty, "no partial spill");
    assert_eq!(at(&wb, "A3"), t("x"));

    let a3 = addr(&wb, "A3");
    wb.set_input(a3, "").unwrap();
    wb.recalculate();
    assert_eq!(at(&wb, "A3"), n(3.0));
    assert!(wb.spill_region(a1).is_some());
}

#[test]
fn literal_entered_into_a_spill_blocks_it() {
    let mut wb = book(&[("A1", "=SEQUENCE(2, 2)")], &[]);
    let b2 = addr(&wb, "B2");
    wb.set_input(b2, "7").unwrap();
    wb.recalculate();
    assert_eq!(kind(&at(&wb, "A1")), Some(ErrorKind::Spill));
    assert_eq!(at(&wb, "B1"), Scalar::Empty);
    assert_eq!(at(&wb, "B2"), n(7.0));
}

#[test]
fn one_by_one_array_occupies_only_its_anchor() {
    let wb = book(&[("A1", "={5}"), ("A2", "9")], &[]);
    assert_eq!(at(&wb, "A1"), n(5.0));
    let region = wb.spill_region(addr(&wb, "A1"));
    assert!(region.is_none_or(|r| (r.rows, r.cols) == (1, 1)));
}

#[test]
fn spill_past_the_grid_edge_is_blocked() {
    let wb = book(&[("A1048575", "=SEQUENCE(3)"), ("XFC1", "=SEQUENCE(1, 3)")], &[]);
    assert_eq!(kind(&at(&wb, "A1048575")), Some(ErrorKind::Spill));
    assert_eq!(kind(&at(&wb, "XFC1")), Some(ErrorKind::Spill));
}

#[test]
fn spill_reference_returns_the_whole_array() {
    let wb = book(
        &[("A1", "=SEQUENCE(6, 2)"), ("D1", "=SUM(A1#)"), ("E1", "=ROWS(A1#) * 10 + COLUMNS(A1#)")],
        &[],
    );
    assert_eq!(at(&wb, "D1"), n(78.0));
    assert_eq!(at(&wb, "E1"), n(62.0));
}

#[test]
fn spill_reference_through_a_name() {
    let wb = book(
        &[("A1", "=SEQUENCE(1, 8)"), ("A3", "=WRAPROWS(DROP(sales#, , 1), 4)")],
        &[("sales", "=Sheet1!$A$1")],
    );
    let g = wb.range_values(&wb.reference("A3:D4").unwrap());
    assert_eq!(g.get(0, 0), &n(2.0));
    assert_eq!(g.get(1, 2), &n(8.0));
    assert_eq!(kind(g.get(1, 3)), Some(ErrorKind::NA));
}

#[test]
fn spill_reference_to_non_anchor_is_ref_error() {
    let wb = book(
        &[("A1", "5"), ("B1", "=A1#"), ("C1", "=SEQUENCE(3)"), ("D1", "=C2#"), ("E1", "=SEQUENCE(2)"), ("E2", "x"), ("F1", "=E1#")],
        &[],
    );
    assert_eq!(kind(&at(&wb, "B1")), Some(ErrorKind::Ref));
    assert_eq!(kind(&at(&wb, "D1")), Some(ErrorKind::Ref));
    assert_eq!(kind(&at(&wb, "F1")), Some(ErrorKind::Ref), "blocked anchor");
}

#[test]
fn implicit_intersection() {
    let mut cells: Vec<(String, String)> = (1..=10).map(|r| (format!("A{r}"), format!("{}", r * 10))).collect();
    cells.push(("B3".into(), "=@$A$1:$A$10".into()));
    cells.push(("B12".into(), "=@$A$1:$A$10".into()));
    cells.push(("C1".into(), "=@{5}".into()));
    cells.push(("D3".into(), "=MOD(@$A$1:$A$10, 3)".into()));
    let refs: Vec<(&str, &str)> = cells.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let wb = book(&refs, &[]);
    assert_eq!(at(&wb, "B3"), n(30.0));
    assert_eq!(kind(&at(&wb, "B12")), Some(ErrorKind::Value));
    assert_eq!(at(&wb, "C1"), n(5.0));
    assert_eq!(at(&wb, "D3"), n(0.0));
}

#[test]
fn row_operand_intersects_by_column() {
    let wb = book(&[("A1", "1"), ("B1", "2"), ("C1", "3"), ("B5", "=@$A$1:$C$1")], &[]);
    assert_eq!(at(&wb, "B5"), n(2.0));
}

#[test]
fn two_cycle_is_circular() {
    let wb = book(&[("A1", "=A2"), ("A2", "=A1"), ("A3", "=A1+1")], &[]);
    assert_eq!(kind(&at(&wb, "A1")), Some(ErrorKind::Circular));
    assert_eq!(kind(&at(&wb, "A2")), Some(ErrorKind::Circular));
    assert_eq!(kind(&at(&wb, "A3")), Some(ErrorKind::Circular));
    assert_eq!(format!("{}", at(&wb, "A1")), "#CIRC!");
}

#[test]
fn self_reference_is_circular() {
    let wb = book(&[("A1", "=A1+1")], &[]);
    assert_eq!(kind(&at(&wb, "A1")), Some(ErrorKind::Circular));
}

#[test]
fn recursion_through_a_name_is_not_circular() {
    let wb = book(
        &[("A1", "=Factλ(5)")],
        &[("Factλ", "=LAMBDA(n, IF(n <= 1, 1, n * Factλ(n - 1)))")],
    );
    assert_eq!(at(&wb, "A1"), n(120.0));
}

#[test]
fn untaken_branch_still_creates_a_dependency() {
    let mut wb = book(&[("A1", "1"), ("B1", "=IF(TRUE, 0, A1)")], &[]);
    let (a1, b1) = (addr(&wb, "A1"), addr(&wb, "B1"));
    assert!(wb.deps(b1).unwrap().reads(&a1));
    let dirty = wb.set_input(a1, "2").unwrap();
    assert!(dirty.contains(&b1));
}

#[test]
fn chain_is_order_independent() {
    let cells = [("A1", "1"), ("A2", "=A1+1"), ("A3", "=A2+1")];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..6 {
        let mut order = cells.to_vec();
        order.shuffle(&mut rng);
        let wb = book(&order, &[]);
        assert_eq!(at(&wb, "A3"), n(3.0));
    }
}

#[test]
fn define_name_validation() {
    let mut wb = Workbook::new();
    wb.define_name("Addλ", "=LAMBDA(x, y, x + y)").unwrap();
    wb.define_name("Sumλ", "=LAMBDA(x, SUM(x))").unwrap();
    assert!(matches!(wb.define_name("A1", "=1"), Err(EngineError::InvalidName(_))));
    assert!(matches!(wb.define_name("SUM", "=1"), Err(EngineError::NameCollision(_))));
    assert!(matches!(wb.define_name("TRUE", "=1"), Err(EngineError::InvalidName(_))));
    assert_eq!(nums(&eval_in(&mut wb, "=SCAN(0, {1;2;3}, Addλ)")), [1.0, 3.0, 6.0]);
    assert_eq!(nums(&eval_in(&mut wb, "=BYROW({1,2;3,4}, Sumλ)")), [3.0, 7.0]);
}

#[test]
fn redefining_a_name_dirties_its_referents() {
    let mut wb = book(&[("A1", "=rate * 100")], &[("rate", "=0.05")]);
    assert_eq!(at(&wb, "A1"), n(5.0));
    wb.define_name("rate", "=0.07").unwrap();
    wb.recalculate();
    assert!((at(&wb, "A1").as_f64().unwrap() - 7.0).abs() < 1e-12);
}

#[test]
fn recalculating_twice_is_idempotent() {
    let text = std::fs::read_to_string(corpus_dir().join("modeloff/model.wb")).unwrap();
    let mut wb = parse_workbook(&text).unwrap();
    wb.recalculate();
    let snap = |wb: &Workbook| -> Vec<String> {
        let mut out = Vec::new();
        for (i, _) in wb.sheet_names().iter().enumerate() {
            if let Some(r) = wb.used_range(gridlambda_core::engine::SheetId(i)) {
                out.extend(wb.range_values(&r).iter().map(|s| format!("{s:?}")));
            }
        }
        out
    };
    let first = snap(&wb);
    wb.invalidate_all();
    wb.recalculate();
    assert_eq!(first, snap(&wb));
    wb.recalculate();
    assert_eq!(first, snap(&wb));
}

#[test]
fn edit_orders_are_confluent() {
    let cells = [
        ("A1", "=SEQUENCE(4)"),
        ("B1", "=A1# * 2"),
        ("C1", "=SUM(B1#)"),
        ("C2", "=C1 + total"),
        ("D1", "=SCAN(0, A1#, Addλ)"),
        ("E1", "x"),
        ("E2", "=IF(E1 = \"x\", D4, 0)"),
    ];
    let names = [("Addλ", "=LAMBDA(a, b, a + b)"), ("total", "=Sheet1!$C$1 * 2")];
    let reference = book(&cells, &names);
    let area = reference.reference("A1:E6").unwrap();
    let expected = reference.range_values(&area);
    assert_eq!(at(&reference, "C2"), n(60.0));
    assert_eq!(at(&reference, "E2"), n(10.0));
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let mut wb = Workbook::new();
        let mut order = cells.to_vec();
        order.shuffle(&mut rng);
        let (first, rest) = order.split_at(rng.random_range(0..order.len()));
        for (a, v) in first {
            let a = addr(&wb, a);
            wb.set_input(a, v).unwrap();
        }
        wb.recalculate();
        for (nm, f) in names {
            wb.define_name(nm, f).unwrap();
        }
        for (a, v) in rest {
            let a = addr(&wb, a);
            wb.set_input(a, v).unwrap();
            if rng.random_bool(0.5) {
                wb.recalculate();
            }
        }
        wb.recalculate();
        assert_eq!(wb.range_values(&area), expected);
    }
}

#[test]
fn vacating_an_anchor_clears_exactly_its_members() {
    let mut wb = book(&[("A1", "=SEQUENCE(2, 2)"), ("C1", "=SEQUENCE(2)")], &[]);
    let a1 = addr(&wb, "A1");
    wb.set_input(a1, "").unwrap();
    wb.recalculate();
    for cell in ["A1", "A2", "B1", "B2"] {
        assert_eq!(at(&wb, cell), Scalar::Empty, "{cell}");
    }
    assert_eq!(at(&wb, "C2"), n(2.0));
}

#[test]
fn no_cell_belongs_to_two_regions() {
    let wb = book(
        &[("A1", "=SEQUENCE(3, 3)"), ("B2", "=SEQUENCE(2)"), ("E1", "=SEQUENCE(1, 2)"), ("E2", "=SEQUENCE(2, 2)")],
        &[],
    );
    let regions: Vec<_> = wb.spill_regions().map(|r| r.reference()).collect();
    for (i, a) in regions.iter().enumerate() {
        for b in &regions[i + 1..] {
            assert!(!a.intersects(b), "{} overlaps {}", a.a1(), b.a1());
        }
    }
    // B2 has content inside A1's would-be region, so A1 is the one blocked.
    assert_eq!(kind(&at(&wb, "A1")), Some(ErrorKind::Spill));
    assert_eq!(at(&wb, "B3"), n(2.0));
    assert_eq!(regions.len(), 3);
}

#[test]
fn every_array_result_spills_or_reports_spill() {
    let wb = book(
        &[("A1", "=SEQUENCE(3)"), ("A2", "1"), ("C1", "=SEQUENCE(2, 2)"), ("F1", "={1,2}")],
        &[],
    );
    for anchor in ["A1", "C1", "F1"] {
        let a = addr(&wb, anchor);
        let spilled = wb.spill_region(a).is_some();
        let blocked = kind(&wb.value(a)) == Some(ErrorKind::Spill);
        assert!(spilled ^ blocked, "{anchor}");
    }
}

#[test]
fn workbook_text_round_trips() {
    let text = std::fs::read_to_string(corpus_dir().join("portfolio/model.wb")).unwrap();
    let mut a = parse_workbook(&text).unwrap();
    let mut b = parse_workbook(&a.to_text()).unwrap();
    a.recalculate();
    b.recalculate();
    let area = a.reference("A1:J14").unwrap();
    assert_eq!(a.range_values(&area), b.range_values(&area));
}

#[test]
fn workbook_format_errors_carry_line_numbers() {
    let err = parse_workbook("# ok\nA1 := 1\nB1 := =1+\n").unwrap_err();
    assert_eq!(err.line, 3);
    let err = parse_workbook("A1 = 1\n").unwrap_err();
    assert_eq!(err.line, 1);
}

#[test]
fn calc_report_lists_error_cells() {
    let mut wb = Workbook::new();
    for (a, v) in [("A1", "=1/0"), ("A2", "=A3"), ("A3", "=A2"), ("A4", "=SEQUENCE(2)"), ("A5", "2")] {
        let a = addr(&wb, a);
        wb.set_input(a, v).unwrap();
    }
    let report = wb.recalculate();
    let kinds: Vec<(String, ErrorKind)> = report.errors.iter().map(|(a, e)| (a.a1(), e.kind)).collect();
    assert_eq!(
        kinds,
        [
            ("A1".to_string(), ErrorKind::Div0),
            ("A2".to_string(), ErrorKind::Circular),
            ("A3".to_string(), ErrorKind::Circular),
            ("A4".to_string(), ErrorKind::Spill),
        ]
    );
}

#[test]
fn multi_sheet_references() {
    let wb = parse_workbook(
        "sheet Inputs\nB1 := 10\nsheet Calc\nA1 := =Inputs!B1 * 2\nA2 := =A1 + 1\n",
    )
    .unwrap();
    let mut wb = wb;
    wb.recalculate();
    assert_eq!(at(&wb, "Calc!A2"), n(21.0));
}
