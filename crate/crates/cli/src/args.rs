//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "pcapscope",
    version,
    about = "Offline packet capture statistics and TCP stream analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
    Ascii,
    Svg,
}

/// Flags shared by every analysis subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Capture file to analyze
    pub input: PathBuf,
    /// Display filter applied before analysis (e.g. "tcp && ip.addr == 192.168.100.1")
    #[arg(long)]
    pub filter: Option<String>,
    /// Output format; defaults to table for listings and ascii for graphs
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// General information about the capture file
    Summary {
        #[command(flatten)]
        common: Common,
    },
    /// Protocol distribution with packet and byte counts
    Hierarchy {
        #[command(flatten)]
        common: Common,
    },
    /// Per-conversation packet, byte, and bit-rate totals
    Conv {
        #[command(flatten)]
        common: Common,
        /// Conversation layer
        #[arg(long, default_value = "ip")]
        layer: String,
    },
    /// Addresses resolved from captured DNS responses
    Resolve {
        #[command(flatten)]
        common: Common,
    },
    /// Packets, bytes, or bits per time bin, optionally split by filters
    Iograph {
        /// Capture file to analyze
        input: PathBuf,
        /// Output format; defaults to ascii
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Write output to this file instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bin width in seconds, within [0.001, 10]
        #[arg(long, default_value_t = 1.0)]
        tick: f64,
        /// Counted quantity
        #[arg(long, default_value = "packets")]
        unit: String,
        /// Display filter creating one series per use; unfiltered when absent
        #[arg(long)]
        filter: Vec<String>,
    },
    /// Sequence diagram of traffic between endpoints
    Flow {
        #[command(flatten)]
        common: Common,
    },
    /// Round-trip time samples for one TCP stream direction
    Rtt {
        #[command(flatten)]
        common: Common,
        /// TCP stream index (see conv --layer tcp)
        #[arg(long, default_value_t = 0)]
        stream: usize,
        /// Data direction: ab or ba
        #[arg(long, default_value = "ab")]
        dir: String,
    },
    /// Bits per second carried by one TCP stream direction
    Throughput {
        #[command(flatten)]
        common: Common,
        /// TCP stream index (see conv --layer tcp)
        #[arg(long, default_value_t = 0)]
        stream: usize,
        /// Data direction: ab or ba
        #[arg(long, default_value = "ab")]
        dir: String,
        /// Bin width in seconds, any positive value
        #[arg(long, default_value_t = 1.0)]
        tick: f64,
    },
    /// Sequence numbers, ACK line, and window line for one TCP stream
    Tcptrace {
        #[command(flatten)]
        common: Common,
        /// TCP stream index (see conv --layer tcp)
        #[arg(long, default_value_t = 0)]
        stream: usize,
        /// Data direction: ab or ba
        #[arg(long, default_value = "ab")]
        dir: String,
    },
    /// Anomaly and connection events grouped by severity
    Expert {
        #[command(flatten)]
        common: Common,
    },
    /// Generate a capture file from a scenario description
    Fixture {
        /// Scenario file (see the scenario grammar in the README)
        #[arg(long)]
        scenario: PathBuf,
        /// Capture file to write
        #[arg(long)]
        out: PathBuf,
    },
}
