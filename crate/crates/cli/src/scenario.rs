//! Line-oriented scenario file parser.
//!
//! Grammar (one directive per line, `#` starts a comment):
//!
//! ```text
//! strict on|off
//! device <label> <ipv4>
//! handshake <stream> <client> <server> <client-port> <server-port> at <t> [rtt <t>]
//! transfer <stream> <ab|ba> sizes <n,n,...> at <t> [gap <t>] [ackdelay <t>] [noack]
//! fin <stream> <ab|ba> at <t> [rtt <t>]
//! rst <stream> <ab|ba> at <t>
//! ack <stream> <ab|ba> at <t>
//! retransmit <stream> at <t>
//! zerowindow <stream> <ab|ba> at <t>
//! dupack <stream> <ab|ba> at <t> [count <n>]
//! udp <from> <to> <src-port> <dst-port> len <n> at <t> [reply <n>] [delay <t>]
//! dns <client> <server> <client-port> <name> <answer-ipv4> at <t> [delay <t>]
//! arp <requester> <responder> at <t> [delay <t>]
//! ```
//!
//! Times are decimal seconds with at most nine fractional digits, parsed
//! exactly. Directions are relative to the stream's handshake initiator.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::net::Ipv4Addr;
use std::path::Path;

use pcapscope_core::fixture::{Device, Event, FixtureScenario, TimedEvent};
use pcapscope_core::tcp::Dir;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ScenarioParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario error at line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ScenarioParseError {}

/// Parses decimal seconds into nanoseconds without float rounding.
fn parse_secs(token: &str) -> Result<u64, String> {
    let bad = || format!("invalid time {token:?}");
    let (whole, frac) = token.split_once('.').unwrap_or((token, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if frac.len() > 9 {
        return Err(format!("time {token:?} has more than 9 fractional digits"));
    }
    let secs: u64 = if whole.is_empty() {
        0
    } else {
        whole.parse().map_err(|_| bad())?
    };
    let mut nanos = 0u64;
    for b in frac.bytes() {
        nanos = nanos * 10 + u64::from(b - b'0');
    }
    nanos *= 10u64.pow(9 - frac.len() as u32);
    secs.checked_mul(1_000_000_000)
        .and_then(|n| n.checked_add(nanos))
        .ok_or_else(|| format!("time {token:?} is out of range"))
}

/// Key/value tail of a directive: `at 1.5 gap 0.1 noack`.
struct Tail<'a> {
    pairs: HashMap<&'a str, &'a str>,
    flags: HashSet<&'a str>,
}

impl<'a> Tail<'a> {
    fn parse(tokens: &[&'a str], keys: &[&str], flags: &[&str]) -> Result<Tail<'a>, String> {
        let mut tail = Tail {
            pairs: HashMap::new(),
            flags: HashSet::new(),
        };
        let mut it = tokens.iter();
        while let Some(&token) = it.next() {
            if flags.contains(&token) {
                if !tail.flags.insert(token) {
                    return Err(format!("duplicate flag {token:?}"));
                }
            } else if keys.contains(&token) {
                let value = it
                    .next()
                    .ok_or_else(|| format!("missing value after {token:?}"))?;
                if tail.pairs.insert(token, value).is_some() {
                    return Err(format!("duplicate key {token:?}"));
                }
            } else {
                return Err(format!("unexpected token {token:?}"));
            }
        }
        Ok(tail)
    }

    fn at(&self) -> Result<u64, String> {
        let token = self.pairs.get("at").ok_or("missing required key \"at\"")?;
        parse_secs(token)
    }

    fn time(&self, key: &str) -> Result<u64, String> {
        match self.pairs.get(key) {
            Some(token) => parse_secs(token),
            None => Ok(0),
        }
    }

    fn number<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, String> {
        match self.pairs.get(key) {
            Some(token) => token
                .parse()
                .map_err(|_| format!("invalid number {token:?} for {key:?}")),
            None => Ok(default),
        }
    }
}

/// Tracks declared names so references fail at their own line.
struct Names {
    devices: HashSet<String>,
    streams: HashSet<String>,
}

impl Names {
    fn device(&self, label: &str) -> Result<String, String> {
        if self.devices.contains(label) {
            Ok(label.to_owned())
        } else {
            Err(format!("unknown device {label:?}"))
        }
    }

    fn stream(&self, name: &str) -> Result<String, String> {
        if self.streams.contains(name) {
            Ok(name.to_owned())
        } else {
            Err(format!("unknown stream {name:?}"))
        }
    }
}

fn parse_dir(token: &str) -> Result<Dir, String> {
    token.parse::<Dir>()
}

fn parse_ip(token: &str) -> Result<Ipv4Addr, String> {
    token
        .parse()
        .map_err(|_| format!("invalid IPv4 address {token:?}"))
}

fn parse_port(token: &str) -> Result<u16, String> {
    token.parse().map_err(|_| format!("invalid port {token:?}"))
}

fn parse_sizes(token: &str) -> Result<Vec<u32>, String> {
    token
        .split(',')
        .map(|part| {
            part.parse()
                .map_err(|_| format!("invalid size {part:?} in {token:?}"))
        })
        .collect()
}

/// One positional head + key/value tail; returns the event.
fn parse_event(head: &[&str], tail: Tail<'_>, names: &mut Names) -> Result<(u64, Event), String> {
    let positional = |n: usize| -> Result<(), String> {
        if head.len() - 1 == n {
            Ok(())
        } else {
            Err(format!(
                "{} takes {n} positional arguments, got {}",
                head[0],
                head.len() - 1
            ))
        }
    };
    let at = tail.at()?;
    let event = match head[0] {
        "handshake" => {
            positional(5)?;
            let stream = head[1].to_owned();
            if !names.streams.insert(stream.clone()) {
                return Err(format!("stream {stream:?} declared twice"));
            }
            Event::Handshake {
                stream,
                client: names.device(head[2])?,
                server: names.device(head[3])?,
                client_port: parse_port(head[4])?,
                server_port: parse_port(head[5])?,
                rtt_nanos: tail.time("rtt")?,
            }
        }
        "transfer" => {
            positional(2)?;
            Event::Transfer {
                stream: names.stream(head[1])?,
                dir: parse_dir(head[2])?,
                sizes: parse_sizes(tail.pairs.get("sizes").ok_or("missing required key \"sizes\"")?)?,
                gap_nanos: tail.time("gap")?,
                ack_delay_nanos: tail.time("ackdelay")?,
                acked: !tail.flags.contains("noack"),
            }
        }
        "fin" => {
            positional(2)?;
            Event::Fin {
                stream: names.stream(head[1])?,
                dir: parse_dir(head[2])?,
                rtt_nanos: tail.time("rtt")?,
            }
        }
        "rst" => {
            positional(2)?;
            Event::Rst {
                stream: names.stream(head[1])?,
                dir: parse_dir(head[2])?,
            }
        }
        "ack" => {
            positional(2)?;
            Event::PureAck {
                stream: names.stream(head[1])?,
                dir: parse_dir(head[2])?,
            }
        }
        "retransmit" => {
            positional(1)?;
            Event::Retransmit {
                stream: names.stream(head[1])?,
            }
        }
        "zerowindow" => {
            positional(2)?;
            Event::ZeroWindow {
                stream: names.stream(head[1])?,
                dir: parse_dir(head[2])?,
            }
        }
        "dupack" => {
            positional(2)?;
            Event::DupAck {
                stream: names.stream(head[1])?,
                dir: parse_dir(head[2])?,
                count: tail.number("count", 1u32)?,
            }
        }
        "udp" => {
            positional(4)?;
            if !tail.pairs.contains_key("len") {
                return Err("missing required key \"len\"".to_owned());
            }
            Event::Udp {
                from: names.device(head[1])?,
                to: names.device(head[2])?,
                src_port: parse_port(head[3])?,
                dst_port: parse_port(head[4])?,
                payload_len: tail.number("len", 0u32)?,
                reply_len: match tail.pairs.get("reply") {
                    Some(_) => Some(tail.number("reply", 0u32)?),
                    None => None,
                },
                delay_nanos: tail.time("delay")?,
            }
        }
        "dns" => {
            positional(5)?;
            Event::Dns {
                client: names.device(head[1])?,
                server: names.device(head[2])?,
                client_port: parse_port(head[3])?,
                name: head[4].to_owned(),
                answer: parse_ip(head[5])?,
                delay_nanos: tail.time("delay")?,
            }
        }
        "arp" => {
            positional(2)?;
            Event::Arp {
                requester: names.device(head[1])?,
                responder: names.device(head[2])?,
                delay_nanos: tail.time("delay")?,
            }
        }
        other => return Err(format!("unknown directive {other:?}")),
    };
    Ok((at, event))
}

/// Keys and flags each event directive accepts in its tail.
fn tail_schema(directive: &str) -> (&'static [&'static str], &'static [&'static str]) {
    match directive {
        "handshake" | "fin" => (&["at", "rtt"], &[]),
        "transfer" => (&["at", "sizes", "gap", "ackdelay"], &["noack"]),
        "dupack" => (&["at", "count"], &[]),
        "udp" => (&["at", "len", "reply", "delay"], &[]),
        "dns" | "arp" => (&["at", "delay"], &[]),
        _ => (&["at"], &[]),
    }
}

pub fn parse_scenario(text: &str) -> Result<FixtureScenario, ScenarioParseError> {
    let mut scenario = FixtureScenario::new();
    let mut names = Names {
        devices: HashSet::new(),
        streams: HashSet::new(),
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let fail = |message: String| ScenarioParseError {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "strict" => match tokens.as_slice() {
                [_, "on"] => scenario.strict = true,
                [_, "off"] => scenario.strict = false,
                _ => return Err(fail("strict takes \"on\" or \"off\"".to_owned())),
            },
            "device" => {
                let [_, label, ip] = tokens.as_slice() else {
                    return Err(fail("device takes a label and an IPv4 address".to_owned()));
                };
                if !names.devices.insert((*label).to_owned()) {
                    return Err(fail(format!("device {label:?} declared twice")));
                }
                scenario
                    .devices
                    .push(Device::new(label, parse_ip(ip).map_err(fail)?));
            }
            directive => {
                let (keys, flags) = tail_schema(directive);
                // the positional head ends where the first tail token starts
                let head_len = tokens
                    .iter()
                    .position(|t| keys.contains(t) || flags.contains(t))
                    .unwrap_or(tokens.len());
                let tail = Tail::parse(&tokens[head_len..], keys, flags).map_err(fail)?;
                let (at_nanos, event) =
                    parse_event(&tokens[..head_len], tail, &mut names).map_err(fail)?;
                scenario.events.push(TimedEvent { at_nanos, event });
            }
        }
    }
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<FixtureScenario, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    parse_scenario(&text).map_err(|e| format!("{}: {e}", path.display()))
}
