//! The `.abm` text format for programs and the sequence literal syntax.
//!
//! ```text
//! #kind: abacus          # header, first non-comment line
//! loop: dec 1 done       # optional `label:` prefix
//! inc 0 0
//! dec 2 loop             # targets are indices or labels
//! done: halt
//! ```
//!
//! Mnemonics: `halt`, `zero R`, `inc R T`, `dec R T`, `add R R R T`,
//! `mul [R,R,...] R R T`, `relu R R T`. `#` starts a comment. Files may use
//! LF or CRLF; printing always emits LF.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::machine::{Instruction, MachineKind, Program, Reg};
use crate::numeric::{NumericError, RVector, Rational, VecSeq};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnosticKind {
    #[error("missing `#kind: abacus` or `#kind: rnn` header")]
    MissingHeader,
    #[error("header must precede all instructions and appear once")]
    MisplacedHeader,
    #[error("unknown machine kind `{0}`")]
    UnknownKind(String),
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("`{mnemonic}` expects {expected} operands, found {found}")]
    OperandCount {
        mnemonic: String,
        expected: usize,
        found: usize,
    },
    #[error("bad register or target `{0}`")]
    BadOperand(String),
    #[error("malformed row list")]
    BadRowList,
    #[error("undefined label `{0}`")]
    UndefinedLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("jump target {target} out of range 0..={len}")]
    TargetOutOfRange { target: usize, len: usize },
    #[error("vector instruction `{0}` in an abacus program")]
    VectorOpInAbacus(String),
}

/// A parse problem located at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub kind: DiagnosticKind,
}

#[derive(Debug, Clone)]
enum TargetRef {
    Index(usize),
    Label(String),
}

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

#[derive(Debug)]
struct RawInstr<'a> {
    line: usize,
    mnemonic: Token<'a>,
    operands: Vec<Token<'a>>,
    rows: Option<(Vec<Token<'a>>, usize)>,
}

fn tokenize(s: &str, start_col: usize) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut begin = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(b) = begin.take() {
                tokens.push(Token {
                    text: &s[b..i],
                    column: start_col + b,
                });
            }
        } else if begin.is_none() {
            begin = Some(i);
        }
    }
    if let Some(b) = begin {
        tokens.push(Token {
            text: &s[b..],
            column: start_col + b,
        });
    }
    tokens
}

fn is_label(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_reg(tok: &Token<'_>, line: usize) -> Result<Reg, Diagnostic> {
    if !tok.text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(diag(line, tok.column, DiagnosticKind::BadOperand(tok.text.into())));
    }
    tok.text
        .parse()
        .map_err(|_| diag(line, tok.column, DiagnosticKind::BadOperand(tok.text.into())))
}

fn parse_target(tok: &Token<'_>, line: usize) -> Result<TargetRef, Diagnostic> {
    if is_label(tok.text) {
        Ok(TargetRef::Label(tok.text.to_string()))
    } else {
        parse_reg(tok, line).map(TargetRef::Index)
    }
}

fn diag(line: usize, column: usize, kind: DiagnosticKind) -> Diagnostic {
    Diagnostic { line, column, kind }
}

/// Parses an `.abm` program, collecting every diagnostic found.
pub fn parse_program(text: &str) -> Result<Program, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut kind: Option<MachineKind> = None;
    let mut raws: Vec<RawInstr<'_>> = Vec::new();
    let mut labels: HashMap<String, usize> = HashMap::new();

    for (idx, raw_line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix("#kind:") {
            let col = line.len() - trimmed.len() + 1;
            let value = rest.split('#').next().unwrap_or("").trim();
            if kind.is_some() || !raws.is_empty() {
                diags.push(diag(line_no, col, DiagnosticKind::MisplacedHeader));
            }
            match value {
                "abacus" => kind = Some(MachineKind::Abacus),
                "rnn" => kind = Some(MachineKind::Rnn),
                other => diags.push(diag(line_no, col, DiagnosticKind::UnknownKind(other.into()))),
            }
            continue;
        }
        let code = line.split('#').next().unwrap_or("");
        let (body, body_col) = match code.find(':') {
            Some(colon) => {
                let name = code[..colon].trim();
                let col = code.len() - code.trim_start().len() + 1;
                if !is_label(name) {
                    diags.push(diag(line_no, col, DiagnosticKind::BadOperand(name.into())));
                } else if labels.insert(name.to_string(), raws.len()).is_some() {
                    diags.push(diag(line_no, col, DiagnosticKind::DuplicateLabel(name.into())));
                }
                (&code[colon + 1..], colon + 2)
            }
            None => (code, 1),
        };
        let (head, rows, tail, tail_col) = match (body.find('['), body.find(']')) {
            (Some(open), Some(close)) if open < close => {
                let inner = &body[open + 1..close];
                let mut rows = Vec::new();
                let mut off = open + 1;
                for part in inner.split(',') {
                    let t = part.trim();
                    let lead = part.len() - part.trim_start().len();
                    rows.push(Token {
                        text: t,
                        column: body_col + off + lead,
                    });
                    off += part.len() + 1;
                }
                (
                    &body[..open],
                    Some((rows, body_col + open)),
                    &body[close + 1..],
                    body_col + close + 1,
                )
            }
            (None, None) => (body, None, "", 0),
            (open, _) => {
                let col = body_col + open.unwrap_or_else(|| body.find(']').unwrap_or(0));
                diags.push(diag(line_no, col, DiagnosticKind::BadRowList));
                continue;
            }
        };
        let mut tokens = tokenize(head, body_col);
        if tokens.is_empty() {
            if rows.is_some() {
                diags.push(diag(line_no, body_col, DiagnosticKind::BadRowList));
            }
            continue;
        }
        let mnemonic = tokens.remove(0);
        let mut operands = tokens;
        operands.extend(tokenize(tail, tail_col));
        raws.push(RawInstr {
            line: line_no,
            mnemonic,
            operands,
            rows,
        });
    }

    let kind = match kind {
        Some(k) => Some(k),
        None => {
            diags.push(diag(1, 1, DiagnosticKind::MissingHeader));
            None
        }
    };
    let len = raws.len();
    let mut instrs = Vec::with_capacity(len);
    for raw in &raws {
        match build_instr(raw, &labels, len, kind) {
            Ok(i) => instrs.push(i),
            Err(d) => diags.push(d),
        }
    }
    if !diags.is_empty() {
        diags.sort_by_key(|d| (d.line, d.column));
        return Err(diags);
    }
    Program::new(kind.expect("header checked"), instrs).map_err(|e| {
        vec![diag(1, 1, DiagnosticKind::BadOperand(e.to_string()))]
    })
}

fn build_instr(
    raw: &RawInstr<'_>,
    labels: &HashMap<String, usize>,
    len: usize,
    kind: Option<MachineKind>,
) -> Result<Instruction, Diagnostic> {
    let line = raw.line;
    let name = raw.mnemonic.text;
    let expected = match name {
        "halt" => 0,
        "zero" => 1,
        "inc" | "dec" => 2,
        "add" => 4,
        "mul" => 3,
        "relu" => 3,
        other => {
            return Err(diag(
                line,
                raw.mnemonic.column,
                DiagnosticKind::UnknownMnemonic(other.into()),
            ))
        }
    };
    let is_vector = matches!(name, "add" | "mul" | "relu");
    if is_vector && kind == Some(MachineKind::Abacus) {
        return Err(diag(
            line,
            raw.mnemonic.column,
            DiagnosticKind::VectorOpInAbacus(name.into()),
        ));
    }
    if (name == "mul") != raw.rows.is_some() {
        let col = raw.rows.as_ref().map_or(raw.mnemonic.column, |r| r.1);
        return Err(diag(line, col, DiagnosticKind::BadRowList));
    }
    let ops = &raw.operands;
    if ops.len() != expected {
        return Err(diag(
            line,
            raw.mnemonic.column,
            DiagnosticKind::OperandCount {
                mnemonic: name.into(),
                expected,
                found: ops.len(),
            },
        ));
    }
    let target = |tok: &Token<'_>| -> Result<usize, Diagnostic> {
        let t = match parse_target(tok, line)? {
            TargetRef::Index(t) => t,
            TargetRef::Label(l) => *labels
                .get(&l)
                .ok_or_else(|| diag(line, tok.column, DiagnosticKind::UndefinedLabel(l.clone())))?,
        };
        if t > len {
            return Err(diag(
                line,
                tok.column,
                DiagnosticKind::TargetOutOfRange { target: t, len },
            ));
        }
        Ok(t)
    };
    let reg = |k: usize| parse_reg(&ops[k], line);
    Ok(match name {
        "halt" => Instruction::Halt,
        "zero" => Instruction::Zero { reg: reg(0)? },
        "inc" => Instruction::Increase {
            reg: reg(0)?,
            target: target(&ops[1])?,
        },
        "dec" => Instruction::Decrease {
            reg: reg(0)?,
            target: target(&ops[1])?,
        },
        "add" => Instruction::Add {
            lhs: reg(0)?,
            rhs: reg(1)?,
            dst: reg(2)?,
            target: target(&ops[3])?,
        },
        "relu" => Instruction::NonLinear {
            src: reg(0)?,
            dst: reg(1)?,
            target: target(&ops[2])?,
        },
        "mul" => {
            let (row_toks, col) = raw.rows.as_ref().expect("checked above");
            if row_toks.iter().any(|t| t.text.is_empty()) {
                return Err(diag(line, *col, DiagnosticKind::BadRowList));
            }
            let rows = row_toks
                .iter()
                .map(|t| parse_reg(t, line))
                .collect::<Result<Vec<_>, _>>()?;
            Instruction::Multiply {
                rows,
                vec: reg(0)?,
                dst: reg(1)?,
                target: target(&ops[2])?,
            }
        }
        _ => unreachable!("mnemonic checked above"),
    })
}

/// Renders one instruction in the canonical surface syntax.
pub struct InstrDisplay<'a>(pub &'a Instruction);

impl fmt::Display for InstrDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Instruction::Halt => write!(f, "halt"),
            Instruction::Zero { reg } => write!(f, "zero {reg}"),
            Instruction::Increase { reg, target } => write!(f, "inc {reg} {target}"),
            Instruction::Decrease { reg, target } => write!(f, "dec {reg} {target}"),
            Instruction::Add {
                lhs,
                rhs,
                dst,
                target,
            } => write!(f, "add {lhs} {rhs} {dst} {target}"),
            Instruction::Multiply {
                rows,
                vec,
                dst,
                target,
            } => {
                let rows: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
                write!(f, "mul [{}] {vec} {dst} {target}", rows.join(","))
            }
            Instruction::NonLinear { src, dst, target } => write!(f, "relu {src} {dst} {target}"),
        }
    }
}

/// Canonical rendering: header, then one instruction per line with numeric
/// targets.
pub fn print_program(p: &Program) -> String {
    let mut out = format!("#kind: {}\n", p.kind());
    for instr in p.instrs() {
        out.push_str(&InstrDisplay(instr).to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiteralError {
    #[error("column {column}: expected {expected}")]
    Syntax {
        column: usize,
        expected: &'static str,
    },
    #[error("column {column}: zero denominator")]
    ZeroDenominator { column: usize },
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char, what: &'static str) -> Result<(), LiteralError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn error(&self, expected: &'static str) -> LiteralError {
        LiteralError::Syntax {
            column: self.pos + 1,
            expected,
        }
    }

    fn rational(&mut self) -> Result<Rational, LiteralError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .find(|c: char| !(c.is_ascii_digit() || c == '-' || c == '/'))
            .unwrap_or(rest.len());
        let text = &rest[..len];
        let r = text.parse::<Rational>().map_err(|e| match e {
            NumericError::ZeroDenominator => LiteralError::ZeroDenominator { column: start + 1 },
            _ => LiteralError::Syntax {
                column: start + 1,
                expected: "a rational `a` or `a/b`",
            },
        })?;
        self.pos += len;
        Ok(r)
    }
}

/// Parses `[]` or `[(r, ...), (r, ...)]`.
pub fn parse_seq_literal(text: &str) -> Result<VecSeq, LiteralError> {
    let mut cur = Cursor { src: text, pos: 0 };
    cur.expect('[', "`[`")?;
    let mut vecs = Vec::new();
    if cur.peek() == Some(']') {
        cur.pos += 1;
    } else {
        loop {
            cur.expect('(', "`(`")?;
            let mut elems = vec![cur.rational()?];
            loop {
                match cur.peek() {
                    Some(',') => {
                        cur.pos += 1;
                        elems.push(cur.rational()?);
                    }
                    Some(')') => {
                        cur.pos += 1;
                        break;
                    }
                    _ => return Err(cur.error("`,` or `)`")),
                }
            }
            vecs.push(RVector::new(elems).expect("at least one element"));
            match cur.peek() {
                Some(',') => cur.pos += 1,
                Some(']') => {
                    cur.pos += 1;
                    break;
                }
                _ => return Err(cur.error("`,` or `]`")),
            }
        }
    }
    if cur.peek().is_some() {
        return Err(cur.error("end of input"));
    }
    Ok(VecSeq::new(vecs))
}

pub fn print_seq_literal(x: &VecSeq) -> String {
    x.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn parses_add2_with_labels() {
        let src = "#kind: abacus\nloop: dec 1 3\ninc 0 0\ndec 2 loop\nhalt";
        assert_eq!(parse_program(src).unwrap(), fixtures::add2());
        let crlf = src.replace('\n', "\r\n");
        assert_eq!(parse_program(&crlf).unwrap(), fixtures::add2());
    }

    #[test]
    fn label_only_line_and_comments() {
        let src = "# leading comment\n#kind: abacus\nstart:\n  dec 1 end # jump out\n  inc 0 start\nend: halt\n";
        let p = parse_program(src).unwrap();
        assert_eq!(
            p.instrs(),
            &[
                Instruction::Decrease { reg: 1, target: 2 },
                Instruction::Increase { reg: 0, target: 0 },
                Instruction::Halt
            ]
        );
    }

    #[test]
    fn vector_op_in_abacus() {
        let errs = parse_program("#kind: abacus\nadd 1 1 1 2").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, 2);
        assert_eq!(errs[0].kind, DiagnosticKind::VectorOpInAbacus("add".into()));
    }

    #[test]
    fn single_halt_rnn() {
        let p = parse_program("#kind: rnn\nhalt").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.kind(), MachineKind::Rnn);
    }

    #[test]
    fn diagnostics_carry_positions() {
        let errs = parse_program("#kind: rnn\nfoo 1\ninc 0 nowhere\ndec 0 9\nmul [1,,2] 3 4 0").unwrap_err();
        let kinds: Vec<_> = errs.iter().map(|d| (d.line, d.kind.clone())).collect();
        assert_eq!(kinds[0], (2, DiagnosticKind::UnknownMnemonic("foo".into())));
        assert_eq!(kinds[1], (3, DiagnosticKind::UndefinedLabel("nowhere".into())));
        assert_eq!(kinds[2], (4, DiagnosticKind::TargetOutOfRange { target: 9, len: 4 }));
        assert_eq!(kinds[3], (5, DiagnosticKind::BadRowList));
        assert_eq!(errs[1].column, 7);

        let errs = parse_program("halt").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::MissingHeader);
        let errs = parse_program("#kind: rnn\nhalt\n#kind: rnn").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::MisplacedHeader);
        let errs = parse_program("#kind: rnn\na: halt\na: halt").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::DuplicateLabel("a".into()));
        let errs = parse_program("#kind: rnn\ninc 0").unwrap_err();
        assert!(matches!(errs[0].kind, DiagnosticKind::OperandCount { .. }));
    }

    #[test]
    fn print_is_canonical() {
        let text = print_program(&fixtures::succ());
        assert_eq!(text, "#kind: abacus\ninc 0 2\nhalt\nhalt\n");
        assert_eq!(print_program(&fixtures::succ_rnn()), "#kind: rnn\ninc 0 2\nhalt\nhalt\n");
        assert_eq!(text, print_program(&fixtures::succ()));
        let mul = Program::rnn(vec![Instruction::Multiply {
            rows: vec![10, 14],
            vec: 20,
            dst: 30,
            target: 1,
        }])
        .unwrap();
        let text = print_program(&mul);
        assert_eq!(text, "#kind: rnn\nmul [10,14] 20 30 1\n");
        assert_eq!(parse_program(&text).unwrap(), mul);
        assert_eq!(parse_program("#kind: rnn\nmul [ 10 , 14 ] 20 30 1").unwrap(), mul);
    }

    #[test]
    fn sequence_literals() {
        let x = parse_seq_literal("[(1/2, -3), (0)]").unwrap();
        assert_eq!(x.shape(), vec![2, 1]);
        assert_eq!(x.to_string(), "[(1/2, -3), (0)]");
        assert_eq!(parse_seq_literal("[]").unwrap(), VecSeq::empty());
        assert_eq!(parse_seq_literal(" [ ] ").unwrap(), VecSeq::empty());
        assert_eq!(print_seq_literal(&parse_seq_literal("[(2/4)]").unwrap()), "[(1/2)]");
        assert_eq!(parse_seq_literal("[( 1/2 )]").unwrap().to_string(), "[(1/2)]");
        assert_eq!(
            parse_seq_literal("[(1/0)]"),
            Err(LiteralError::ZeroDenominator { column: 3 })
        );
        assert!(matches!(parse_seq_literal("[()]"), Err(LiteralError::Syntax { column: 3, .. })));
        assert!(parse_seq_literal("[(1)").is_err());
        assert!(parse_seq_literal("[(1)] x").is_err());
    }
}
