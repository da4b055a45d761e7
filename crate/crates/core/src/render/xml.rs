//! Minimal XML well-formedness checking, enough to validate emitted SVG:
//! tag balance, a single root element, quoted attributes, and known
//! character entities.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlError {
    /// Byte offset where checking failed.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for XmlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xml error at byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for XmlError {}

/// Escape text for use in XML content or double-quoted attribute values.
pub fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

struct Checker<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn is_name_byte(b: u8, first: bool) -> bool {
    b.is_ascii_alphabetic()
        || b == b'_'
        || b == b':'
        || (!first && (b.is_ascii_digit() || b == b'-' || b == b'.'))
}

impl<'a> Checker<'a> {
    fn err<T>(&self, offset: usize, message: &str) -> Result<T, XmlError> {
        Err(XmlError {
            offset,
            message: message.to_owned(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn read_name(&mut self) -> Result<&'a str, XmlError> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if is_name_byte(b, self.pos == start) {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return self.err(start, "expected name");
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap())
    }

    /// Validates `&...;` starting at the ampersand.
    fn check_entity(&mut self) -> Result<(), XmlError> {
        let start = self.pos;
        self.pos += 1;
        let end = match self.bytes[self.pos..].iter().position(|&b| b == b';') {
            Some(rel) if rel > 0 && rel <= 10 => self.pos + rel,
            _ => return self.err(start, "unterminated entity reference"),
        };
        let body = &self.bytes[self.pos..end];
        let ok = match body {
            b"amp" | b"lt" | b"gt" | b"quot" | b"apos" => true,
            _ if body.first() == Some(&b'#') => {
                let digits = &body[1..];
                if digits.first() == Some(&b'x') {
                    digits.len() > 1 && digits[1..].iter().all(u8::is_ascii_hexdigit)
                } else {
                    !digits.is_empty() && digits.iter().all(u8::is_ascii_digit)
                }
            }
            _ => false,
        };
        if !ok {
            return self.err(start, "unknown entity reference");
        }
        self.pos = end + 1;
        Ok(())
    }

    fn check_attributes(&mut self) -> Result<(), XmlError> {
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'>') | Some(b'/') | Some(b'?') | None => return Ok(()),
                _ => {}
            }
            self.read_name()?;
            self.skip_ws();
            if self.peek() != Some(b'=') {
                return self.err(self.pos, "expected '=' after attribute name");
            }
            self.pos += 1;
            self.skip_ws();
            let quote = match self.peek() {
                Some(q @ (b'"' | b'\'')) => q,
                _ => return self.err(self.pos, "attribute value must be quoted"),
            };
            self.pos += 1;
            loop {
                match self.peek() {
                    None => return self.err(self.pos, "unterminated attribute value"),
                    Some(q) if q == quote => {
                        self.pos += 1;
                        break;
                    }
                    Some(b'<') => return self.err(self.pos, "'<' in attribute value"),
                    Some(b'&') => self.check_entity()?,
                    Some(_) => self.pos += 1,
                }
            }
        }
    }
}

/// Checks that `text` is a well-formed XML document: optional declaration,
/// comments, one root element, balanced tags, quoted attributes, and only
/// known entity references.
pub fn check_well_formed(text: &str) -> Result<(), XmlError> {
    let mut c = Checker {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let mut stack: Vec<&str> = Vec::new();
    let mut roots = 0usize;

    loop {
        match c.peek() {
            None => break,
            Some(b'<') => {
                let open = c.pos;
                c.pos += 1;
                match c.peek() {
                    Some(b'?') => {
                        // declaration / processing instruction
                        match text[c.pos..].find("?>") {
                            Some(rel) => c.pos += rel + 2,
                            None => return c.err(open, "unterminated processing instruction"),
                        }
                    }
                    Some(b'!') => {
                        if text[c.pos..].starts_with("!--") {
                            match text[c.pos + 3..].find("-->") {
                                Some(rel) => c.pos += 3 + rel + 3,
                                None => return c.err(open, "unterminated comment"),
                            }
                        } else {
                            return c.err(open, "unsupported markup declaration");
                        }
                    }
                    Some(b'/') => {
                        c.pos += 1;
                        let name = c.read_name()?;
                        c.skip_ws();
                        if c.peek() != Some(b'>') {
                            return c.err(c.pos, "expected '>' in closing tag");
                        }
                        c.pos += 1;
                        match stack.pop() {
                            Some(open_name) if open_name == name => {}
                            Some(open_name) => {
                                return Err(XmlError {
                                    offset: open,
                                    message: format!(
                                        "closing tag </{name}> does not match <{open_name}>"
                                    ),
                                });
                            }
                            None => return c.err(open, "closing tag without open element"),
                        }
                    }
                    _ => {
                        let name = c.read_name()?;
                        c.check_attributes()?;
                        match c.peek() {
                            Some(b'/') => {
                                c.pos += 1;
                                if c.peek() != Some(b'>') {
                                    return c.err(c.pos, "expected '>' after '/'");
                                }
                                c.pos += 1;
                                if stack.is_empty() {
                                    roots += 1;
                                }
                            }
                            Some(b'>') => {
                                c.pos += 1;
                                if stack.is_empty() {
                                    roots += 1;
                                }
                                stack.push(name);
                            }
                            _ => return c.err(c.pos, "unterminated tag"),
                        }
                    }
                }
            }
            Some(b'&') => c.check_entity()?,
            Some(b'>') => return c.err(c.pos, "stray '>' outside markup"),
            Some(_) => {
                if !stack.is_empty() || c.peek().is_some_and(|b| b.is_ascii_whitespace()) {
                    c.pos += 1;
                } else {
                    return c.err(c.pos, "text outside root element");
                }
            }
        }
    }

    if let Some(open_name) = stack.last() {
        return Err(XmlError {
            offset: text.len(),
            message: format!("unclosed element <{open_name}>"),
        });
    }
    if roots != 1 {
        return Err(XmlError {
            offset: text.len(),
            message: format!("expected one root element, found {roots}"),
        });
    }
    Ok(())
}
