//! Reader and writer for the subset of the MATPOWER case format that the DC
//! model needs: `mpc.baseMVA`, `mpc.bus` and `mpc.branch`.
//!
//! Everything else in the file (generators, costs, cell arrays, strings) is
//! skipped and reported back as a warning. Bus column 1 is the id, column 2
//! the type and column 3 the nominal demand; branch columns 1, 2, 4 and 6 are
//! from, to, reactance and rateA, and column 11 (status) is honoured when
//! present.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::{Branch, Bus, NetError, Network};

#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub network: Network,
    pub warnings: Vec<String>,
}

pub fn parse_matpower_case(text: &str) -> Result<Network, NetError> {
    parse_matpower_case_report(text).map(|r| r.network)
}

pub fn parse_matpower_case_report(text: &str) -> Result<CaseReport, NetError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        warnings: Vec::new(),
    };
    let mut base_mva = None;
    let mut bus_rows = None;
    let mut branch_rows = None;

    while let Some(tok) = parser.peek().cloned() {
        match &tok.kind {
            Tok::Newline | Tok::Semi | Tok::Comma => {
                parser.pos += 1;
            }
            Tok::Ident(word) if word == "function" || word == "end" => parser.skip_line(),
            Tok::Ident(name) => {
                parser.pos += 1;
                parser.expect_eq(&tok)?;
                let value = parser.value()?;
                match (name.as_str(), value) {
                    ("mpc.baseMVA", Value::Scalar(v)) => base_mva = Some(v),
                    ("mpc.bus", Value::Matrix(rows)) => bus_rows = Some((tok.line, rows)),
                    ("mpc.branch", Value::Matrix(rows)) => branch_rows = Some((tok.line, rows)),
                    ("mpc.baseMVA" | "mpc.bus" | "mpc.branch", _) => {
                        return Err(syntax(&tok, format!("unexpected value type for `{name}`")))
                    }
                    ("mpc.version", _) => {}
                    (other, _) => parser.warnings.push(format!("ignored field `{other}`")),
                }
            }
            _ => return Err(syntax(&tok, "expected an assignment".into())),
        }
    }

    let base_mva = base_mva.ok_or(NetError::MissingField("mpc.baseMVA"))?;
    if !(base_mva > 0.0) {
        return Err(NetError::Syntax {
            line: 0,
            column: 0,
            message: format!("baseMVA must be positive, got {base_mva}"),
        });
    }
    let (bus_line, bus_rows) = bus_rows.ok_or(NetError::MissingField("mpc.bus"))?;
    let (branch_line, branch_rows) = branch_rows.ok_or(NetError::MissingField("mpc.branch"))?;

    let mut buses = Vec::with_capacity(bus_rows.len());
    let mut seen = HashSet::new();
    let mut type3 = Vec::new();
    for (r, row) in bus_rows.iter().enumerate() {
        if row.len() < 3 {
            return Err(NetError::Syntax {
                line: bus_line,
                column: 0,
                message: format!("bus row {} has {} columns, need at least 3", r + 1, row.len()),
            });
        }
        let id = as_bus_id(row[0]).ok_or_else(|| NetError::Syntax {
            line: bus_line,
            column: 0,
            message: format!("bus row {}: invalid bus id {}", r + 1, row[0]),
        })?;
        if !seen.insert(id) {
            return Err(NetError::DuplicateBus(id));
        }
        if row[1] == 3.0 {
            type3.push(id);
        }
        buses.push(Bus {
            id,
            has_load: row[2] != 0.0,
            nominal_load_mw: row[2],
        });
    }

    let mut branches = Vec::with_capacity(branch_rows.len());
    for (r, row) in branch_rows.iter().enumerate() {
        if row.len() < 6 {
            return Err(NetError::Syntax {
                line: branch_line,
                column: 0,
                message: format!("branch row {} has {} columns, need at least 6", r + 1, row.len()),
            });
        }
        if row.len() >= 11 && row[10] == 0.0 {
            parser
                .warnings
                .push(format!("branch row {} is out of service and was skipped", r + 1));
            continue;
        }
        let endpoint = |v: f64| {
            let id = as_bus_id(v).ok_or_else(|| NetError::Syntax {
                line: branch_line,
                column: 0,
                message: format!("branch row {}: invalid bus id {v}", r + 1),
            })?;
            if seen.contains(&id) {
                Ok(id)
            } else {
                Err(NetError::UnknownBranchBus { branch: r + 1, bus: id })
            }
        };
        let from = endpoint(row[0])?;
        let to = endpoint(row[1])?;
        let reactance = row[3];
        if !(reactance > 0.0) {
            return Err(NetError::NonpositiveReactance {
                branch: r + 1,
                from,
                to,
                reactance,
            });
        }
        let rate = row[5];
        let flow_limit = if rate == 0.0 { f64::INFINITY } else { rate.abs() / base_mva };
        branches.push(Branch {
            from,
            to,
            reactance,
            flow_limit,
        });
    }

    let reference_bus = type3
        .iter()
        .copied()
        .min()
        .or_else(|| buses.iter().map(|b| b.id).min())
        .ok_or(NetError::MissingField("mpc.bus"))?;

    Ok(CaseReport {
        network: Network {
            buses,
            branches,
            base_mva,
            reference_bus,
        },
        warnings: parser.warnings,
    })
}

/// Serialize a network back to the case subset.
///
/// Numbers are written so that re-parsing reproduces every field bit for
/// bit. The demand column carries `nominal_load_mw`, except that buses with
/// `has_load` but no nominal demand get a token demand of 1 MW so the load
/// flag survives.
pub fn write_matpower_case(network: &Network) -> String {
    let mut out = String::new();
    out.push_str("function mpc = energyshed_case\n");
    out.push_str("%% DC subset written by energyshed\n");
    out.push_str("mpc.version = '2';\n");
    let _ = writeln!(out, "mpc.baseMVA = {:?};", network.base_mva);
    out.push_str("\n%% bus_i type Pd\nmpc.bus = [\n");
    for bus in &network.buses {
        let kind = if bus.id == network.reference_bus { 3 } else { 1 };
        let pd = match (bus.has_load, bus.nominal_load_mw != 0.0) {
            (true, true) | (false, false) => bus.nominal_load_mw,
            (true, false) => 1.0,
            (false, true) => 0.0,
        };
        let _ = writeln!(out, "\t{}\t{}\t{:?};", bus.id, kind, pd);
    }
    out.push_str("];\n\n%% fbus tbus r x b rateA rateB rateC ratio angle status\nmpc.branch = [\n");
    for br in &network.branches {
        let rate = encode_rate(br.flow_limit, network.base_mva);
        let _ = writeln!(
            out,
            "\t{}\t{}\t0\t{:?}\t0\t{}\t0\t0\t0\t0\t1;",
            br.from, br.to, br.reactance, rate
        );
    }
    out.push_str("];\n");
    out
}

/// Decimal rateA that divides back to exactly `limit`.
fn encode_rate(limit: f64, base: f64) -> String {
    if limit.is_infinite() {
        return "0".into();
    }
    let mut candidate = limit * base;
    for _ in 0..64 {
        let text = format!("{candidate:?}");
        let back: f64 = text.parse().expect("float repr parses");
        let decoded = back / base;
        if decoded == limit {
            return text;
        }
        candidate = if decoded < limit {
            candidate.next_up()
        } else {
            candidate.next_down()
        };
    }
    format!("{:?}", limit * base)
}

fn as_bus_id(v: f64) -> Option<u32> {
    (v.fract() == 0.0 && v >= 1.0 && v <= u32::MAX as f64).then_some(v as u32)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str,
    Eq,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Newline,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    line: usize,
    column: usize,
}

fn syntax(tok: &Token, message: String) -> NetError {
    NetError::Syntax {
        line: tok.line,
        column: tok.column,
        message,
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, NetError> {
    let mut tokens = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;
        // `...` continues a statement on the next line
        let mut continued = false;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let push = |tokens: &mut Vec<Token>, kind| tokens.push(Token { kind, line, column });
            match c {
                '%' => break,
                ' ' | '\t' | '\r' => i += 1,
                '=' => {
                    push(&mut tokens, Tok::Eq);
                    i += 1;
                }
                '[' => {
                    push(&mut tokens, Tok::LBracket);
                    i += 1;
                }
                ']' => {
                    push(&mut tokens, Tok::RBracket);
                    i += 1;
                }
                '{' => {
                    push(&mut tokens, Tok::LBrace);
                    i += 1;
                }
                '}' => {
                    push(&mut tokens, Tok::RBrace);
                    i += 1;
                }
                ';' => {
                    push(&mut tokens, Tok::Semi);
                    i += 1;
                }
                ',' => {
                    push(&mut tokens, Tok::Comma);
                    i += 1;
                }
                '\'' | '"' => {
                    let close = chars[i + 1..]
                        .iter()
                        .position(|&d| d == c)
                        .ok_or_else(|| NetError::Syntax {
                            line,
                            column,
                            message: "unterminated string".into(),
                        })?;
                    push(&mut tokens, Tok::Str);
                    i += close + 2;
                }
                '.' if chars[i..].starts_with(&['.', '.', '.']) => {
                    continued = true;
                    break;
                }
                c if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' => {
                    let start = i;
                    i += 1;
                    while i < chars.len() {
                        let d = chars[i];
                        let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                        if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                            i += 1;
                        } else {
                            break;
                        }
                    }
                    let word: String = chars[start..i].iter().collect();
                    let value = match word.as_str() {
                        "-" | "+" if i < chars.len() && chars[i..].starts_with(&['I', 'n', 'f']) => {
                            i += 3;
                            if word == "-" {
                                f64::NEG_INFINITY
                            } else {
                                f64::INFINITY
                            }
                        }
                        _ => word.parse::<f64>().map_err(|_| NetError::Syntax {
                            line,
                            column,
                            message: format!("invalid number `{word}`"),
                        })?,
                    };
                    push(&mut tokens, Tok::Number(value));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len()
                        && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.')
                    {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    let kind = match word.as_str() {
                        "Inf" | "inf" => Tok::Number(f64::INFINITY),
                        "NaN" | "nan" => Tok::Number(f64::NAN),
                        _ => Tok::Ident(word),
                    };
                    push(&mut tokens, kind);
                }
                other => {
                    return Err(NetError::Syntax {
                        line,
                        column,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        if !continued {
            tokens.push(Token {
                kind: Tok::Newline,
                line,
                column: chars.len() + 1,
            });
        }
    }
    Ok(tokens)
}

enum Value {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
    Other,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    warnings: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn skip_line(&mut self) {
        while let Some(tok) = self.next() {
            if tok.kind == Tok::Newline {
                break;
            }
        }
    }

    fn expect_eq(&mut self, after: &Token) -> Result<(), NetError> {
        match self.next() {
            Some(Token { kind: Tok::Eq, .. }) => Ok(()),
            Some(tok) => Err(syntax(&tok, "expected `=`".into())),
            None => Err(syntax(after, "expected `=` before end of input".into())),
        }
    }

    fn value(&mut self) -> Result<Value, NetError> {
        let tok = self.next().ok_or(NetError::Syntax {
            line: 0,
            column: 0,
            message: "unexpected end of input".into(),
        })?;
        match tok.kind {
            Tok::Number(v) => Ok(Value::Scalar(v)),
            Tok::Str => Ok(Value::Other),
            Tok::LBracket => self.matrix(&tok).map(Value::Matrix),
            Tok::LBrace => {
                let mut depth = 1;
                while depth > 0 {
                    match self.next() {
                        Some(Token { kind: Tok::LBrace, .. }) => depth += 1,
                        Some(Token { kind: Tok::RBrace, .. }) => depth -= 1,
                        Some(_) => {}
                        None => return Err(syntax(&tok, "unterminated `{`".into())),
                    }
                }
                Ok(Value::Other)
            }
            _ => Err(syntax(&tok, "expected a value".into())),
        }
    }

    fn matrix(&mut self, open: &Token) -> Result<Vec<Vec<f64>>, NetError> {
        let mut rows = Vec::new();
        let mut row = Vec::new();
        loop {
            let tok = self
                .next()
                .ok_or_else(|| syntax(open, "unterminated `[`".into()))?;
            match tok.kind {
                Tok::Number(v) => row.push(v),
                Tok::Comma => {}
                Tok::Semi | Tok::Newline => {
                    if !row.is_empty() {
                        rows.push(std::mem::take(&mut row));
                    }
                }
                Tok::RBracket => {
                    if !row.is_empty() {
                        rows.push(row);
                    }
                    break;
                }
                _ => return Err(syntax(&tok, "expected a number inside matrix".into())),
            }
        }
        if let Some(width) = rows.first().map(Vec::len) {
            if let Some((i, bad)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
                return Err(syntax(
                    open,
                    format!("matrix row {} has {} columns, expected {width}", i + 1, bad.len()),
                ));
            }
        }
        Ok(rows)
    }
}
