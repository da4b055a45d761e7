//! Command-line frontend: argument handling, capture loading, and output
//! routing for every analysis in the core library.
//!
//! Exit codes: 0 on success, 1 on input or file errors, 2 on usage errors.
//! Output is deterministic: identical arguments and input bytes produce
//! byte-identical output.

pub mod args;
pub mod scenario;
mod views;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;

use pcapscope_core::capture::{read_capture, write_capture, CaptureHeader};
use pcapscope_core::dissect::DissectedCapture;
use pcapscope_core::filter::{filter_capture, parse_filter, FilterExpr};
use pcapscope_core::fixture::generate_fixture;
use pcapscope_core::flow::{flow_graph, render_flow_text};
use pcapscope_core::render::{render_ascii, render_svg, ChartSpec, Table};
use pcapscope_core::stats::{
    conversations, protocol_hierarchy, resolved_addresses, summarize, ConvLayer,
};
use pcapscope_core::tcp::{
    analyze_capture, assign_streams, expert_events, rtt_series, tcptrace_series,
    throughput_series, Dir, TcpStreamAnalysis,
};
use pcapscope_core::timeseries::{io_graph, SeriesUnit};

use args::{Cli, Command, Common, Format};

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: String) -> Failure {
        Failure { code: 1, message }
    }

    fn usage(message: String) -> Failure {
        Failure { code: 2, message }
    }
}

struct CmdOutput {
    body: String,
    out: Option<PathBuf>,
}

/// Runs the CLI against injected streams and returns the exit code.
/// `argv[0]` is the program name.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let rendered = err.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli.command, stderr) {
        Ok(output) => match output.out {
            Some(path) => match std::fs::write(&path, output.body.as_bytes()) {
                Ok(()) => 0,
                Err(err) => {
                    let _ = writeln!(stderr, "error: {}: {err}", path.display());
                    1
                }
            },
            None => {
                let _ = write!(stdout, "{}", output.body);
                0
            }
        },
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.code
        }
    }
}

fn format_name(format: Format) -> &'static str {
    match format {
        Format::Table => "table",
        Format::Csv => "csv",
        Format::Json => "json",
        Format::Ascii => "ascii",
        Format::Svg => "svg",
    }
}

/// Listing subcommands render tables only.
fn listing_format(format: Option<Format>, cmd: &str) -> Result<Format, Failure> {
    match format.unwrap_or(Format::Table) {
        f @ (Format::Table | Format::Csv | Format::Json) => Ok(f),
        f => Err(Failure::usage(format!(
            "--format {} is not supported for {cmd}",
            format_name(f)
        ))),
    }
}

fn render_table(table: &Table, format: Format) -> String {
    match format {
        Format::Table => table.to_text(),
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
        Format::Ascii | Format::Svg => unreachable!("gated by listing_format"),
    }
}

/// Graph subcommands render the chart (ascii/svg) or its data (others).
fn render_graph(table: Table, chart: ChartSpec, format: Format) -> String {
    match format {
        Format::Ascii => render_ascii(&chart),
        Format::Svg => render_svg(&chart),
        other => render_table(&table, other),
    }
}

fn parse_filter_arg(text: &str) -> Result<FilterExpr, Failure> {
    parse_filter(text).map_err(|err| Failure::usage(format!("invalid filter {text:?}: {err}")))
}

/// Reads, dissects, and optionally filters a capture; truncation is
/// reported as a warning, not a failure.
fn load(
    input: &Path,
    filter: Option<&str>,
    stderr: &mut dyn Write,
) -> Result<DissectedCapture, Failure> {
    let expr = filter.map(parse_filter_arg).transpose()?;
    let capture = read_capture(input)
        .map_err(|err| Failure::input(format!("{}: {err}", input.display())))?;
    if let Some(cut) = capture.truncated {
        let _ = writeln!(
            stderr,
            "warning: {}: truncated at byte {} (record {}); analyzing {} packets",
            input.display(),
            cut.offset,
            cut.index,
            capture.records.len()
        );
    }
    let mut dc = DissectedCapture::dissect(capture);
    if let Some(expr) = &expr {
        dc = filter_capture(dc, expr);
    }
    Ok(dc)
}

fn load_common(common: &Common, stderr: &mut dyn Write) -> Result<DissectedCapture, Failure> {
    load(&common.input, common.filter.as_deref(), stderr)
}

/// Finds one TCP stream by index; the error names the available count.
fn stream_analysis(
    dc: &DissectedCapture,
    stream: usize,
) -> Result<TcpStreamAnalysis, Failure> {
    let mut analyses = analyze_capture(dc);
    let total = analyses.len();
    let pos = analyses
        .iter()
        .position(|a| a.key.stream_index == stream)
        .ok_or_else(|| {
            Failure::input(format!(
                "stream {stream} not found (capture has {total} TCP streams)"
            ))
        })?;
    Ok(analyses.swap_remove(pos))
}

fn parse_dir_arg(dir: &str) -> Result<Dir, Failure> {
    dir.parse::<Dir>().map_err(Failure::usage)
}

fn execute(command: Command, stderr: &mut dyn Write) -> Result<CmdOutput, Failure> {
    match command {
        Command::Summary { common } => {
            let format = listing_format(common.format, "summary")?;
            let dc = load_common(&common, stderr)?;
            let name = common
                .input
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| common.input.display().to_string());
            let table = views::summary_table(&summarize(&dc, &name));
            Ok(CmdOutput {
                body: render_table(&table, format),
                out: common.out,
            })
        }
        Command::Hierarchy { common } => {
            let format = listing_format(common.format, "hierarchy")?;
            let dc = load_common(&common, stderr)?;
            let table = views::hierarchy_table(&protocol_hierarchy(&dc), format == Format::Table);
            Ok(CmdOutput {
                body: render_table(&table, format),
                out: common.out,
            })
        }
        Command::Conv { common, layer } => {
            let format = listing_format(common.format, "conv")?;
            let layer: ConvLayer = layer.parse().map_err(Failure::usage)?;
            let dc = load_common(&common, stderr)?;
            let convs = conversations(&dc, layer);
            let streams = if layer == ConvLayer::Tcp {
                views::stream_index_map(&assign_streams(&dc))
            } else {
                Default::default()
            };
            let table = views::conv_table(&convs, layer, &streams);
            Ok(CmdOutput {
                body: render_table(&table, format),
                out: common.out,
            })
        }
        Command::Resolve { common } => {
            let format = listing_format(common.format, "resolve")?;
            let dc = load_common(&common, stderr)?;
            let table = views::resolve_table(&resolved_addresses(&dc));
            Ok(CmdOutput {
                body: render_table(&table, format),
                out: common.out,
            })
        }
        Command::Iograph {
            input,
            format,
            out,
            tick,
            unit,
            filter,
        } => {
            let format = format.unwrap_or(Format::Ascii);
            let unit: SeriesUnit = unit.parse().map_err(Failure::usage)?;
            let filters = filter
                .iter()
                .map(|text| parse_filter_arg(text))
                .collect::<Result<Vec<_>, _>>()?;
            let dc = load(&input, None, stderr)?;
            let series =
                io_graph(&dc, &filters, tick, unit).map_err(|err| Failure::usage(err.to_string()))?;
            let table = views::series_table(&series);
            let chart = views::iograph_chart(&series, tick, unit);
            Ok(CmdOutput {
                body: render_graph(table, chart, format),
                out,
            })
        }
        Command::Flow { common } => {
            let format = common.format.unwrap_or(Format::Ascii);
            if format == Format::Svg {
                return Err(Failure::usage(
                    "--format svg is not supported for flow".to_owned(),
                ));
            }
            let dc = load_common(&common, stderr)?;
            let graph = flow_graph(&dc, None);
            let body = if format == Format::Ascii {
                render_flow_text(&graph)
            } else {
                render_table(&views::flow_table(&graph), format)
            };
            Ok(CmdOutput {
                body,
                out: common.out,
            })
        }
        Command::Rtt {
            common,
            stream,
            dir,
        } => {
            let format = common.format.unwrap_or(Format::Ascii);
            let dir = parse_dir_arg(&dir)?;
            let dc = load_common(&common, stderr)?;
            let analysis = stream_analysis(&dc, stream)?;
            let series = rtt_series(&analysis, dir, dc.start_nanos());
            let table = views::samples_table(&series, "rtt");
            let chart = views::rtt_chart(&series, stream, dir);
            Ok(CmdOutput {
                body: render_graph(table, chart, format),
                out: common.out,
            })
        }
        Command::Throughput {
            common,
            stream,
            dir,
            tick,
        } => {
            let format = common.format.unwrap_or(Format::Ascii);
            let dir = parse_dir_arg(&dir)?;
            if !(tick > 0.0 && tick.is_finite()) {
                return Err(Failure::usage(format!(
                    "--tick must be a positive number of seconds, got {tick}"
                )));
            }
            let dc = load_common(&common, stderr)?;
            let analysis = stream_analysis(&dc, stream)?;
            let series = throughput_series(&analysis, dir, tick, dc.start_nanos());
            let table = views::series_table(std::slice::from_ref(&series));
            let chart = views::throughput_chart(&series, stream, dir, tick);
            Ok(CmdOutput {
                body: render_graph(table, chart, format),
                out: common.out,
            })
        }
        Command::Tcptrace {
            common,
            stream,
            dir,
        } => {
            let format = common.format.unwrap_or(Format::Ascii);
            let dir = parse_dir_arg(&dir)?;
            let dc = load_common(&common, stderr)?;
            let analysis = stream_analysis(&dc, stream)?;
            let trace = tcptrace_series(&analysis, dir, dc.start_nanos());
            let table = views::tcptrace_table(&trace);
            let chart = views::tcptrace_chart(&trace);
            Ok(CmdOutput {
                body: render_graph(table, chart, format),
                out: common.out,
            })
        }
        Command::Expert { common } => {
            let format = listing_format(common.format, "expert")?;
            let dc = load_common(&common, stderr)?;
            let analyses = analyze_capture(&dc);
            let summary = expert_events(&dc, &analyses);
            let table = views::expert_table(&summary);
            let mut body = String::new();
            if format == Format::Table {
                body.push_str(&views::expert_counts_line(&summary));
            }
            body.push_str(&render_table(&table, format));
            Ok(CmdOutput {
                body,
                out: common.out,
            })
        }
        Command::Fixture { scenario, out } => {
            let parsed = scenario::load_scenario(&scenario).map_err(Failure::input)?;
            let records = generate_fixture(&parsed)
                .map_err(|err| Failure::input(format!("{}: {err}", scenario.display())))?;
            let count = records.len();
            write_capture(&out, &CaptureHeader::new(65_535), &records)
                .map_err(|err| Failure::input(format!("{}: {err}", out.display())))?;
            Ok(CmdOutput {
                body: format!("wrote {count} packets to {}\n", out.display()),
                out: None,
            })
        }
    }
}
