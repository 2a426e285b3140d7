//! OpenQASM 2.0 reader and writer for the supported gate vocabulary.
//!
//! The accepted subset: the version header, `include` lines (ignored), one
//! `qreg`, at most one `creg`, the seventeen schema gates (`cu1` is read as
//! `cp`), `measure`, and `barrier`. Angle parameters may use numeric
//! literals, `pi`, parentheses, and `+ - * /`. Gate definitions, `reset`,
//! and classically-conditioned statements are rejected.

use std::fmt::Write as _;

use super::{CircuitError, Gate, GateKind, QuantumCircuit};

/// Errors from reading OpenQASM text.
#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unsupported gate `{name}`")]
    UnsupportedGate { line: usize, name: String },
    #[error("line {line}: multiple qreg declarations (only one quantum register is supported)")]
    MultipleQreg { line: usize },
    #[error("line {line}: invalid gate: {source}")]
    Gate { line: usize, source: CircuitError },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    Arrow,
    Semi,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1 }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, message: message.into() }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws_and_comments(&mut self) {
        loop {
            match self.peek_byte() {
                Some(b'\n') => {
                    self.line += 1;
                    self.pos += 1;
                }
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'/') => {
                    while let Some(c) = self.peek_byte() {
                        if c == b'\n' {
                            break;
                        }
                        self.pos += 1;
                    }
                }
                _ => return,
            }
        }
    }

    /// Next token with the line it started on, or `None` at end of input.
    fn next_tok(&mut self) -> Result<Option<(Tok, usize)>, ParseError> {
        self.skip_ws_and_comments();
        let line = self.line;
        let c = match self.peek_byte() {
            Some(c) => c,
            None => return Ok(None),
        };
        let tok = match c {
            b';' => {
                self.pos += 1;
                Tok::Semi
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'[' => {
                self.pos += 1;
                Tok::LBracket
            }
            b']' => {
                self.pos += 1;
                Tok::RBracket
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'-' => {
                self.pos += 1;
                if self.peek_byte() == Some(b'>') {
                    self.pos += 1;
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            b'"' => {
                self.pos += 1;
                let start = self.pos;
                while let Some(c) = self.peek_byte() {
                    if c == b'"' {
                        break;
                    }
                    if c == b'\n' {
                        return Err(self.error("unterminated string"));
                    }
                    self.pos += 1;
                }
                if self.peek_byte() != Some(b'"') {
                    return Err(self.error("unterminated string"));
                }
                let s = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                self.pos += 1;
                Tok::Str(s)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while let Some(c) = self.peek_byte() {
                    if c.is_ascii_alphanumeric() || c == b'_' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
            }
            c if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while let Some(c) = self.peek_byte() {
                    if c.is_ascii_digit() || c == b'.' {
                        self.pos += 1;
                    } else if c == b'e' || c == b'E' {
                        self.pos += 1;
                        if matches!(self.peek_byte(), Some(b'+') | Some(b'-')) {
                            self.pos += 1;
                        }
                    } else {
                        break;
                    }
                }
                let text = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                let value: f64 = text
                    .parse()
                    .map_err(|_| self.error(format!("bad numeric literal `{text}`")))?;
                Tok::Number(value)
            }
            other => {
                return Err(self.error(format!("unexpected character `{}`", other as char)));
            }
        };
        Ok(Some((tok, line)))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, l)| *l)
            .unwrap_or(1)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line(), message: message.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        let t = self
            .toks
            .get(self.pos)
            .map(|(t, _)| t.clone())
            .ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let got = self.next()?;
        if got != tok {
            return Err(ParseError::Syntax {
                line: self.toks[self.pos - 1].1,
                message: format!("expected {what}, found {got:?}"),
            });
        }
        Ok(())
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            other => Err(ParseError::Syntax {
                line: self.toks[self.pos - 1].1,
                message: format!("expected {what}, found {other:?}"),
            }),
        }
    }

    fn expect_index(&mut self) -> Result<usize, ParseError> {
        match self.next()? {
            Tok::Number(n) if n >= 0.0 && n.fract() == 0.0 => Ok(n as usize),
            other => Err(ParseError::Syntax {
                line: self.toks[self.pos - 1].1,
                message: format!("expected integer index, found {other:?}"),
            }),
        }
    }

    /// Register reference: `name` (whole register) or `name[i]`.
    fn parse_ref(&mut self) -> Result<(String, Option<usize>), ParseError> {
        let name = self.expect_ident("register name")?;
        if self.peek() == Some(&Tok::LBracket) {
            self.pos += 1;
            let idx = self.expect_index()?;
            self.expect(Tok::RBracket, "`]`")?;
            Ok((name, Some(idx)))
        } else {
            Ok((name, None))
        }
    }

    /// Resolves a quantum operand against the declared qreg.
    fn resolve_qubit(&self, reference: &(String, Option<usize>), line: usize) -> Result<Option<usize>, ParseError> {
        let (name, idx) = reference;
        let (qname, qsize) = self
            .qreg
            .as_ref()
            .ok_or(ParseError::Syntax { line, message: "qreg used before declaration".into() })?;
        if name != qname {
            return Err(ParseError::Syntax {
                line,
                message: format!("unknown register `{name}`"),
            });
        }
        match idx {
            Some(i) if *i < *qsize => Ok(Some(*i)),
            Some(i) => Err(ParseError::Syntax {
                line,
                message: format!("index {i} out of range for qreg {qname}[{qsize}]"),
            }),
            None => Ok(None), // whole-register (broadcast) reference
        }
    }

    // Angle grammar: expr := term ((+|-) term)*, term := unary ((*|/) unary)*,
    // unary := (+|-) unary | number | pi | ( expr ).
    fn parse_expr(&mut self) -> Result<f64, ParseError> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc += self.parse_term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc -= self.parse_term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<f64, ParseError> {
        let mut acc = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc *= self.parse_unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let d = self.parse_unary()?;
                    if d == 0.0 {
                        return Err(self.error("division by zero in angle expression"));
                    }
                    acc /= d;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<f64, ParseError> {
        match self.next()? {
            Tok::Minus => Ok(-self.parse_unary()?),
            Tok::Plus => self.parse_unary(),
            Tok::Number(n) => Ok(n),
            Tok::Ident(s) if s == "pi" => Ok(std::f64::consts::PI),
            Tok::LParen => {
                let v = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(v)
            }
            other => Err(ParseError::Syntax {
                line: self.toks[self.pos - 1].1,
                message: format!("expected angle expression, found {other:?}"),
            }),
        }
    }

    fn parse_params(&mut self) -> Result<Vec<f64>, ParseError> {
        if self.peek() != Some(&Tok::LParen) {
            return Ok(Vec::new());
        }
        self.pos += 1;
        let mut params = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(params);
        }
        loop {
            params.push(self.parse_expr()?);
            match self.next()? {
                Tok::Comma => continue,
                Tok::RParen => return Ok(params),
                other => {
                    return Err(ParseError::Syntax {
                        line: self.toks[self.pos - 1].1,
                        message: format!("expected `,` or `)`, found {other:?}"),
                    })
                }
            }
        }
    }
}

fn gate_kind_for(name: &str) -> Option<GateKind> {
    Some(match name {
        "h" => GateKind::H,
        "cx" => GateKind::Cnot,
        "x" => GateKind::X,
        "y" => GateKind::Y,
        "z" => GateKind::Z,
        "rx" => GateKind::Rx,
        "ry" => GateKind::Ry,
        "rz" => GateKind::Rz,
        "cz" => GateKind::Cz,
        "cp" | "cu1" => GateKind::Cp,
        "t" => GateKind::T,
        "ccx" => GateKind::Toffoli,
        "swap" => GateKind::Swap,
        "tdg" => GateKind::Tdg,
        "s" => GateKind::S,
        "sdg" => GateKind::Sdg,
        "u3" => GateKind::U3,
        _ => return None,
    })
}

/// Parses OpenQASM 2.0 text into a circuit.
pub fn parse_qasm(text: &str) -> Result<QuantumCircuit, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next_tok()? {
        toks.push(t);
    }
    let mut p = Parser { toks, pos: 0, qreg: None, creg: None };

    // Header: OPENQASM 2.0;
    let head = p.expect_ident("`OPENQASM` header")?;
    if head != "OPENQASM" {
        return Err(ParseError::Syntax {
            line: p.toks[p.pos - 1].1,
            message: format!("expected `OPENQASM` header, found `{head}`"),
        });
    }
    match p.next()? {
        Tok::Number(v) if v == 2.0 => {}
        other => {
            return Err(ParseError::Syntax {
                line: p.toks[p.pos - 1].1,
                message: format!("unsupported OpenQASM version {other:?}"),
            })
        }
    }
    p.expect(Tok::Semi, "`;`")?;

    let mut gates: Vec<(Gate, usize)> = Vec::new();
    while p.peek().is_some() {
        let line = p.line();
        let head = match p.next()? {
            Tok::Ident(s) => s,
            other => {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("expected statement, found {other:?}"),
                })
            }
        };
        match head.as_str() {
            "include" => {
                match p.next()? {
                    Tok::Str(_) => {}
                    other => {
                        return Err(ParseError::Syntax {
                            line,
                            message: format!("expected include path string, found {other:?}"),
                        })
                    }
                }
                p.expect(Tok::Semi, "`;`")?;
            }
            "qreg" => {
                if p.qreg.is_some() {
                    return Err(ParseError::MultipleQreg { line });
                }
                let name = p.expect_ident("register name")?;
                p.expect(Tok::LBracket, "`[`")?;
                let size = p.expect_index()?;
                p.expect(Tok::RBracket, "`]`")?;
                p.expect(Tok::Semi, "`;`")?;
                if size == 0 {
                    return Err(ParseError::Syntax {
                        line,
                        message: "qreg size must be at least 1".into(),
                    });
                }
                p.qreg = Some((name, size));
            }
            "creg" => {
                if p.creg.is_some() {
                    return Err(ParseError::Syntax {
                        line,
                        message: "multiple creg declarations (only one classical register is supported)"
                            .into(),
                    });
                }
                let name = p.expect_ident("register name")?;
                p.expect(Tok::LBracket, "`[`")?;
                let size = p.expect_index()?;
                p.expect(Tok::RBracket, "`]`")?;
                p.expect(Tok::Semi, "`;`")?;
                p.creg = Some((name, size));
            }
            "measure" => {
                let q = p.parse_ref()?;
                p.expect(Tok::Arrow, "`->`")?;
                let c = p.parse_ref()?;
                p.expect(Tok::Semi, "`;`")?;
                if let Some((cname, csize)) = &p.creg {
                    if &c.0 != cname {
                        return Err(ParseError::Syntax {
                            line,
                            message: format!("unknown classical register `{}`", c.0),
                        });
                    }
                    if let Some(i) = c.1 {
                        if i >= *csize {
                            return Err(ParseError::Syntax {
                                line,
                                message: format!("index {i} out of range for creg {cname}[{csize}]"),
                            });
                        }
                    }
                } else {
                    return Err(ParseError::Syntax {
                        line,
                        message: "measure requires a declared creg".into(),
                    });
                }
                match p.resolve_qubit(&q, line)? {
                    Some(qubit) => gates.push((Gate::measure(qubit), line)),
                    None => {
                        let n = p.qreg.as_ref().unwrap().1;
                        for qubit in 0..n {
                            gates.push((Gate::measure(qubit), line));
                        }
                    }
                }
            }
            "barrier" => {
                let mut qubits = Vec::new();
                loop {
                    let r = p.parse_ref()?;
                    match p.resolve_qubit(&r, line)? {
                        Some(q) => qubits.push(q),
                        None => qubits.extend(0..p.qreg.as_ref().unwrap().1),
                    }
                    match p.next()? {
                        Tok::Comma => continue,
                        Tok::Semi => break,
                        other => {
                            return Err(ParseError::Syntax {
                                line,
                                message: format!("expected `,` or `;`, found {other:?}"),
                            })
                        }
                    }
                }
                gates.push((
                    Gate::new(GateKind::Barrier, qubits, vec![])
                        .map_err(|source| ParseError::Gate { line, source })?,
                    line,
                ));
            }
            "if" => {
                return Err(ParseError::Syntax {
                    line,
                    message: "classically-conditioned statements are not supported".into(),
                });
            }
            "gate" | "opaque" => {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("`{head}` definitions are not supported"),
                });
            }
            name => {
                let kind = gate_kind_for(name)
                    .ok_or_else(|| ParseError::UnsupportedGate { line, name: name.to_string() })?;
                let params = p.parse_params()?;
                let mut operands = Vec::new();
                loop {
                    operands.push(p.parse_ref()?);
                    match p.next()? {
                        Tok::Comma => continue,
                        Tok::Semi => break,
                        other => {
                            return Err(ParseError::Syntax {
                                line,
                                message: format!("expected `,` or `;`, found {other:?}"),
                            })
                        }
                    }
                }
                let resolved: Vec<Option<usize>> = operands
                    .iter()
                    .map(|r| p.resolve_qubit(r, line))
                    .collect::<Result<_, _>>()?;
                if resolved.iter().any(|r| r.is_none()) {
                    // Whole-register shorthand: only meaningful for
                    // single-qubit gates, where it fans out over the register.
                    if kind.arity() == Some(1) && resolved.len() == 1 {
                        let n = p.qreg.as_ref().unwrap().1;
                        for q in 0..n {
                            gates.push((
                                Gate::new(kind, vec![q], params.clone())
                                    .map_err(|source| ParseError::Gate { line, source })?,
                                line,
                            ));
                        }
                        continue;
                    }
                    return Err(ParseError::Syntax {
                        line,
                        message: "whole-register operands are only supported for single-qubit gates, measure, and barrier"
                            .into(),
                    });
                }
                let qubits: Vec<usize> = resolved.into_iter().map(|r| r.unwrap()).collect();
                gates.push((
                    Gate::new(kind, qubits, params)
                        .map_err(|source| ParseError::Gate { line, source })?,
                    line,
                ));
            }
        }
    }

    let (_, n_qubits) = p.qreg.ok_or(ParseError::Syntax {
        line: lexer.line,
        message: "no qreg declaration".into(),
    })?;
    let mut circuit = QuantumCircuit::new(n_qubits);
    for (gate, line) in gates {
        circuit
            .push(gate)
            .map_err(|source| ParseError::Gate { line, source })?;
    }
    Ok(circuit)
}

/// Writes a circuit back out as OpenQASM 2.0. Reparsing the output yields a
/// gate-identical circuit.
pub fn emit_qasm(circuit: &QuantumCircuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.n_qubits());
    let _ = writeln!(out, "creg c[{}];", circuit.n_qubits());
    for gate in circuit.gates() {
        match gate.kind {
            GateKind::Measure => {
                let q = gate.qubits[0];
                let _ = writeln!(out, "measure q[{q}] -> c[{q}];");
            }
            GateKind::Barrier => {
                let list: Vec<String> =
                    gate.qubits.iter().map(|q| format!("q[{q}]")).collect();
                let _ = writeln!(out, "barrier {};", list.join(","));
            }
            kind => {
                let mut stmt = kind.qasm_name().to_string();
                if !gate.params.is_empty() {
                    let ps: Vec<String> = gate.params.iter().map(|p| format!("{p}")).collect();
                    let _ = write!(stmt, "({})", ps.join(","));
                }
                let qs: Vec<String> = gate.qubits.iter().map(|q| format!("q[{q}]")).collect();
                let _ = writeln!(out, "{} {};", stmt, qs.join(","));
            }
        }
    }
    out
}
