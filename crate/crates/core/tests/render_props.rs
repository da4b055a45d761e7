//! Emitter properties: CSV survives a round trip through a conforming
//! reader, JSON is valid, SVG is well-formed, ASCII output has the
//! promised shape, and tick generation stays inside the data range.

use proptest::prelude::*;

use pcapscope_core::render::xml::check_well_formed;
use pcapscope_core::render::{
    nice_ticks, render_ascii, render_svg, Cell, ChartSeries, ChartSpec, SeriesStyle, Table,
};

/// Minimal RFC 4180 reader: LF records, `"` quoting, doubled-quote escapes.
fn parse_csv(text: &str) -> Vec<Vec<String>> {
    let mut rows = vec![vec![String::new()]];
    let mut quoted = false;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        let row = rows.last_mut().unwrap();
        let field = row.last_mut().unwrap();
        match c {
            '"' if field.is_empty() && !quoted => quoted = true,
            '"' if quoted => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    field.push('"');
                } else {
                    quoted = false;
                }
            }
            ',' if !quoted => row.push(String::new()),
            '\n' if !quoted => rows.push(vec![String::new()]),
            _ => field.push(c),
        }
    }
    // the trailing LF leaves one empty sentinel row
    if rows.last().is_some_and(|r| r == &[String::new()]) {
        rows.pop();
    }
    rows
}

fn arb_cell() -> impl Strategy<Value = Cell> {
    prop_oneof![
        "[ -~]{0,12}".prop_map(Cell::Text),
        any::<u64>().prop_map(Cell::Int),
        (-1.0e9..1.0e9f64).prop_map(Cell::Float),
        (-1.0e9..1.0e9f64).prop_map(Cell::Number),
        (0u32..2_000_000).prop_map(|n| Cell::Number(f64::from(n))),
    ]
}

fn arb_table() -> impl Strategy<Value = Table> {
    (1usize..5, 0usize..8).prop_flat_map(|(cols, rows)| {
        prop::collection::vec(
            prop::collection::vec(arb_cell(), cols..=cols),
            rows..=rows,
        )
        .prop_map(move |cells| {
            let columns: Vec<String> = (0..cols).map(|i| format!("c{i}")).collect();
            let mut table = Table::new(&columns);
            for row in cells {
                table.push(row);
            }
            table
        })
    })
}

fn arb_series() -> impl Strategy<Value = ChartSeries> {
    (
        "[a-z]{1,8}",
        prop_oneof![
            Just(SeriesStyle::Line),
            Just(SeriesStyle::Step),
            Just(SeriesStyle::Marks)
        ],
        prop::collection::vec((0.0..100.0f64, 0.0..1.0e6f64), 0..30),
    )
        .prop_map(|(label, style, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            ChartSeries {
                label,
                style,
                points,
            }
        })
}

fn arb_chart() -> impl Strategy<Value = ChartSpec> {
    (
        "[ -~]{0,20}",
        prop::collection::vec(arb_series(), 1..4),
    )
        .prop_map(|(title, series)| ChartSpec::new(&title, "x", "y", series))
}

proptest! {
    #[test]
    fn csv_round_trips_through_a_conforming_reader(table in arb_table()) {
        let parsed = parse_csv(&table.to_csv());
        prop_assert_eq!(parsed.len(), table.rows.len() + 1);
        prop_assert_eq!(&parsed[0], &table.columns);
        for (row, cells) in parsed[1..].iter().zip(&table.rows) {
            let rendered: Vec<String> = cells.iter().map(Cell::render).collect();
            prop_assert_eq!(row, &rendered);
        }
    }

    #[test]
    fn json_is_valid_and_field_complete(table in arb_table()) {
        let value: serde_json::Value =
            serde_json::from_str(&table.to_json()).expect("valid json");
        let rows = value.as_array().expect("array");
        prop_assert_eq!(rows.len(), table.rows.len());
        for row in rows {
            let object = row.as_object().expect("object rows");
            prop_assert_eq!(object.len(), table.columns.len());
        }
    }

    #[test]
    fn svg_is_well_formed(chart in arb_chart()) {
        let svg = render_svg(&chart);
        if let Err(err) = check_well_formed(&svg) {
            return Err(TestCaseError::fail(format!("{err}\n{svg}")));
        }
        prop_assert!(svg.starts_with("<?xml"));
        prop_assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn ascii_has_the_documented_shape(chart in arb_chart()) {
        let text = render_ascii(&chart);
        let expected = chart.height + 2 + usize::from(chart.series.len() > 1);
        prop_assert_eq!(text.lines().count(), expected);
        prop_assert_eq!(render_ascii(&chart), text);
    }

    #[test]
    fn ticks_stay_inside_the_padded_range(
        lo in -1.0e6..1.0e6f64,
        span in 1.0e-3..1.0e6f64,
        target in 3usize..10,
    ) {
        let hi = lo + span;
        let ticks = nice_ticks(lo, hi, target);
        prop_assert!(ticks.len() >= 2, "ticks: {ticks:?}");
        let slack = span * 1e-9;
        for pair in ticks.windows(2) {
            prop_assert!(pair[0] < pair[1], "not increasing: {ticks:?}");
        }
        prop_assert!(*ticks.first().unwrap() >= lo - slack);
        prop_assert!(*ticks.last().unwrap() <= hi + slack);
    }
}

#[test]
fn csv_escapes_quotes_commas_and_newlines() {
    let mut table = Table::new(&["a", "b"]);
    table.push(vec![Cell::text("x,y"), Cell::text("he said \"hi\"")]);
    table.push(vec![Cell::text("line\nbreak"), Cell::text("plain")]);
    assert_eq!(
        table.to_csv(),
        "a,b\n\"x,y\",\"he said \"\"hi\"\"\"\n\"line\nbreak\",plain\n"
    );
    let parsed = parse_csv(&table.to_csv());
    assert_eq!(parsed[1], vec!["x,y".to_string(), "he said \"hi\"".to_string()]);
    assert_eq!(parsed[2][0], "line\nbreak");
}

#[test]
fn float_cells_print_six_decimals_and_reparse_close() {
    for value in [0.0, 0.05, 123.456789, 1.0e-7, 98765.4321] {
        let printed = Cell::Float(value).render();
        assert_eq!(printed, format!("{value:.6}"));
        let reparsed: f64 = printed.parse().expect("numeric");
        assert!((reparsed - value).abs() <= 5.0e-7, "{value} vs {reparsed}");
    }
    assert_eq!(Cell::Number(42.0).render(), "42");
    assert_eq!(Cell::Number(42.5).render(), "42.500000");
}
