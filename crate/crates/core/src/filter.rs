//! Display-filter subset: protocol atoms, equality comparisons, boolean
//! operators.
//!
//! Grammar (keywords case-insensitive):
//!
//! ```text
//! expr := or
//! or   := and (("||" | "or") and)*
//! and  := unary (("&&" | "and") unary)*
//! unary := "!" unary | "(" expr ")" | atom | field "==" value
//! ```

use std::fmt;
use std::net::{IpAddr, Ipv4Addr};

use crate::dissect::{LayerName, LayerStack};

/// Protocols nameable in a filter. `Ip` matches ipv4 or ipv6.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtoAtom {
    Eth,
    Arp,
    Ip,
    Ipv6,
    Icmp,
    Tcp,
    Udp,
    Dns,
}

impl ProtoAtom {
    fn as_str(self) -> &'static str {
        match self {
            ProtoAtom::Eth => "eth",
            ProtoAtom::Arp => "arp",
            ProtoAtom::Ip => "ip",
            ProtoAtom::Ipv6 => "ipv6",
            ProtoAtom::Icmp => "icmp",
            ProtoAtom::Tcp => "tcp",
            ProtoAtom::Udp => "udp",
            ProtoAtom::Dns => "dns",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddrField {
    Addr,
    Src,
    Dst,
}

impl AddrField {
    fn as_str(self) -> &'static str {
        match self {
            AddrField::Addr => "ip.addr",
            AddrField::Src => "ip.src",
            AddrField::Dst => "ip.dst",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortField {
    TcpPort,
    UdpPort,
    TcpSrcPort,
    TcpDstPort,
}

impl PortField {
    fn as_str(self) -> &'static str {
        match self {
            PortField::TcpPort => "tcp.port",
            PortField::UdpPort => "udp.port",
            PortField::TcpSrcPort => "tcp.srcport",
            PortField::TcpDstPort => "tcp.dstport",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterExpr {
    Proto(ProtoAtom),
    AddrEq { field: AddrField, value: Ipv4Addr },
    PortEq { field: PortField, value: u16 },
    Not(Box<FilterExpr>),
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
}

/// Canonical printer: lowercase atoms, `!`/`&&`/`||`, parentheses only
/// where precedence demands them. `parse(expr.to_string())` reproduces
/// the expression.
impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // precedence: or = 1, and = 2, unary = 3
        fn prec(e: &FilterExpr) -> u8 {
            match e {
                FilterExpr::Or(..) => 1,
                FilterExpr::And(..) => 2,
                _ => 3,
            }
        }
        fn write(e: &FilterExpr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let wrap = prec(e) < min;
            if wrap {
                f.write_str("(")?;
            }
            match e {
                FilterExpr::Proto(p) => f.write_str(p.as_str())?,
                FilterExpr::AddrEq { field, value } => write!(f, "{} == {value}", field.as_str())?,
                FilterExpr::PortEq { field, value } => write!(f, "{} == {value}", field.as_str())?,
                FilterExpr::Not(inner) => {
                    f.write_str("!")?;
                    write(inner, 3, f)?;
                }
                FilterExpr::And(a, b) => {
                    write(a, 2, f)?;
                    f.write_str(" && ")?;
                    // right child one level tighter keeps left associativity
                    write(b, 3, f)?;
                }
                FilterExpr::Or(a, b) => {
                    write(a, 1, f)?;
                    f.write_str(" || ")?;
                    write(b, 2, f)?;
                }
            }
            if wrap {
                f.write_str(")")?;
            }
            Ok(())
        }
        write(self, 0, f)
    }
}

/// Parse failure with the byte offset it occurred at.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("filter error at byte {offset}: expected {expected}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
}

impl ParseError {
    fn new(offset: usize, expected: impl Into<String>) -> Self {
        ParseError {
            offset,
            expected: expected.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Value(String),
    AndOp,
    OrOp,
    Not,
    Eq,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lex = Lexer {
            text: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lex.next_token()?;
            let end = matches!(tok, Tok::End);
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next_token(&mut self) -> Result<(Tok, usize), ParseError> {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let at = self.pos;
        if self.pos >= self.text.len() {
            return Ok((Tok::End, at));
        }
        let b = self.text[self.pos];
        let tok = match b {
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'!' => {
                self.pos += 1;
                Tok::Not
            }
            b'&' => {
                self.expect_pair(b"&&", "'&&'")?;
                Tok::AndOp
            }
            b'|' => {
                self.expect_pair(b"||", "'||'")?;
                Tok::OrOp
            }
            b'=' => {
                self.expect_pair(b"==", "'=='")?;
                Tok::Eq
            }
            b if b.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.text.len() && ident_byte(self.text[self.pos]) {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.text[start..self.pos])
                    .expect("ascii bytes")
                    .to_ascii_lowercase();
                match word.as_str() {
                    "and" => Tok::AndOp,
                    "or" => Tok::OrOp,
                    _ => Tok::Ident(word),
                }
            }
            b if b.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.text.len()
                    && (self.text[self.pos].is_ascii_digit() || self.text[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                Tok::Value(
                    std::str::from_utf8(&self.text[start..self.pos])
                        .expect("ascii bytes")
                        .to_owned(),
                )
            }
            other => {
                return Err(ParseError::new(
                    at,
                    format!("a filter token, found {:?}", char::from(other)),
                ))
            }
        };
        Ok((tok, at))
    }

    fn expect_pair(&mut self, pair: &[u8], label: &str) -> Result<(), ParseError> {
        if self.text.len() >= self.pos + 2 && &self.text[self.pos..self.pos + 2] == pair {
            self.pos += 2;
            Ok(())
        } else {
            Err(ParseError::new(self.pos, label.to_owned()))
        }
    }
}

fn ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'.' || b == b'_'
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let entry = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        entry
    }

    fn or(&mut self) -> Result<FilterExpr, ParseError> {
        let mut left = self.and()?;
        while matches!(self.peek(), Tok::OrOp) {
            self.bump();
            let right = self.and()?;
            left = FilterExpr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<FilterExpr, ParseError> {
        let mut left = self.unary()?;
        while matches!(self.peek(), Tok::AndOp) {
            self.bump();
            let right = self.unary()?;
            left = FilterExpr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<FilterExpr, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(FilterExpr::Not(Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.or()?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (_, at) => Err(ParseError::new(at, "')'".to_owned())),
                }
            }
            Tok::Ident(_) => {
                let (tok, at) = self.bump();
                let word = match tok {
                    Tok::Ident(w) => w,
                    _ => unreachable!(),
                };
                self.atom_or_comparison(&word, at)
            }
            _ => Err(ParseError::new(
                self.offset(),
                "a protocol, field comparison, '!' or '('".to_owned(),
            )),
        }
    }

    fn atom_or_comparison(&mut self, word: &str, at: usize) -> Result<FilterExpr, ParseError> {
        let proto = match word {
            "eth" => Some(ProtoAtom::Eth),
            "arp" => Some(ProtoAtom::Arp),
            "ip" => Some(ProtoAtom::Ip),
            "ipv6" => Some(ProtoAtom::Ipv6),
            "icmp" => Some(ProtoAtom::Icmp),
            "tcp" => Some(ProtoAtom::Tcp),
            "udp" => Some(ProtoAtom::Udp),
            "dns" => Some(ProtoAtom::Dns),
            _ => None,
        };
        if let Some(p) = proto {
            return Ok(FilterExpr::Proto(p));
        }
        let addr_field = match word {
            "ip.addr" => Some(AddrField::Addr),
            "ip.src" => Some(AddrField::Src),
            "ip.dst" => Some(AddrField::Dst),
            _ => None,
        };
        if let Some(field) = addr_field {
            let value = self.comparison_value(field.as_str())?;
            let (text, vat) = value;
            let value: Ipv4Addr = text
                .parse()
                .map_err(|_| ParseError::new(vat, "an IPv4 dotted quad".to_owned()))?;
            return Ok(FilterExpr::AddrEq { field, value });
        }
        let port_field = match word {
            "tcp.port" => Some(PortField::TcpPort),
            "udp.port" => Some(PortField::UdpPort),
            "tcp.srcport" => Some(PortField::TcpSrcPort),
            "tcp.dstport" => Some(PortField::TcpDstPort),
            _ => None,
        };
        if let Some(field) = port_field {
            let value = self.comparison_value(field.as_str())?;
            let (text, vat) = value;
            let value: u16 = text
                .parse()
                .map_err(|_| ParseError::new(vat, "a port number (0-65535)".to_owned()))?;
            return Ok(FilterExpr::PortEq { field, value });
        }
        Err(ParseError::new(
            at,
            format!("a known protocol or field, found {word:?}"),
        ))
    }

    /// Consumes `== value` after a field name; returns the raw value text.
    fn comparison_value(&mut self, field: &str) -> Result<(String, usize), ParseError> {
        match self.bump() {
            (Tok::Eq, _) => {}
            (_, at) => return Err(ParseError::new(at, format!("'==' after {field}"))),
        }
        match self.bump() {
            (Tok::Value(text), at) => Ok((text, at)),
            (_, at) => Err(ParseError::new(at, format!("a value for {field}"))),
        }
    }
}

pub fn parse_filter(text: &str) -> Result<FilterExpr, ParseError> {
    let tokens = Lexer::tokens(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.or()?;
    match parser.bump() {
        (Tok::End, _) => Ok(expr),
        (_, at) => Err(ParseError::new(at, "end of filter".to_owned())),
    }
}

pub fn match_filter(expr: &FilterExpr, stack: &LayerStack) -> bool {
    match expr {
        FilterExpr::Proto(p) => match p {
            ProtoAtom::Eth => stack.has(LayerName::Ethernet),
            ProtoAtom::Arp => stack.has(LayerName::Arp),
            ProtoAtom::Ip => stack.has(LayerName::Ipv4) || stack.has(LayerName::Ipv6),
            ProtoAtom::Ipv6 => stack.has(LayerName::Ipv6),
            ProtoAtom::Icmp => stack.has(LayerName::Icmp),
            ProtoAtom::Tcp => stack.has(LayerName::Tcp),
            ProtoAtom::Udp => stack.has(LayerName::Udp),
            ProtoAtom::Dns => stack.has(LayerName::Dns),
        },
        FilterExpr::AddrEq { field, value } => {
            let Some((src, dst)) = stack.ip_pair() else {
                return false;
            };
            let value = IpAddr::V4(*value);
            match field {
                AddrField::Addr => src == value || dst == value,
                AddrField::Src => src == value,
                AddrField::Dst => dst == value,
            }
        }
        FilterExpr::PortEq { field, value } => match field {
            PortField::TcpPort => stack
                .tcp()
                .is_some_and(|t| t.src_port == *value || t.dst_port == *value),
            PortField::UdpPort => stack
                .udp()
                .is_some_and(|u| u.src_port == *value || u.dst_port == *value),
            PortField::TcpSrcPort => stack.tcp().is_some_and(|t| t.src_port == *value),
            PortField::TcpDstPort => stack.tcp().is_some_and(|t| t.dst_port == *value),
        },
        FilterExpr::Not(inner) => !match_filter(inner, stack),
        FilterExpr::And(a, b) => match_filter(a, stack) && match_filter(b, stack),
        FilterExpr::Or(a, b) => match_filter(a, stack) || match_filter(b, stack),
    }
}

/// Restricts a dissected capture to the packets matching `expr`. Retained
/// records keep their original 1-based indices.
pub fn filter_capture(dc: crate::dissect::DissectedCapture, expr: &FilterExpr) -> crate::dissect::DissectedCapture {
    let crate::dissect::DissectedCapture { mut capture, stacks } = dc;
    let keep: Vec<bool> = stacks.iter().map(|s| match_filter(expr, s)).collect();
    let mut it = keep.iter();
    capture.records.retain(|_| *it.next().unwrap());
    let mut it = keep.iter();
    let stacks = stacks.into_iter().filter(|_| *it.next().unwrap()).collect();
    crate::dissect::DissectedCapture { capture, stacks }
}
