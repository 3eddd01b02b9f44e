use super::Formula;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("lexical error at byte {position}: unexpected character {found:?}")]
    Lexical { position: usize, found: char },
    #[error("syntax error at byte {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Lexical { position, .. } | ParseError::Syntax { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Arrow,
    Bar,
    Amp,
    BoxOp,
    DiaOp,
    LocalDiaOp,
    Tilde,
    Question,
    LParen,
    RParen,
    Dot,
    False,
    True,
    Mu,
    Nu,
    Lower(String),
    Upper(String),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Arrow => "'->'".into(),
            Tok::Bar => "'|'".into(),
            Tok::Amp => "'&'".into(),
            Tok::BoxOp => "'[]'".into(),
            Tok::DiaOp => "'<>'".into(),
            Tok::LocalDiaOp => "'<^>'".into(),
            Tok::Tilde => "'~'".into(),
            Tok::Question => "'?'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Dot => "'.'".into(),
            Tok::False => "'false'".into(),
            Tok::True => "'true'".into(),
            Tok::Mu => "'mu'".into(),
            Tok::Nu => "'nu'".into(),
            Tok::Lower(s) | Tok::Upper(s) => format!("identifier '{s}'"),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str, internal: bool) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = text[i..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let rest = &text[i..];
        let fixed: &[(&str, Tok)] = &[
            ("->", Tok::Arrow),
            ("[]", Tok::BoxOp),
            ("<>", Tok::DiaOp),
            ("|", Tok::Bar),
            ("&", Tok::Amp),
            ("~", Tok::Tilde),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            (".", Tok::Dot),
        ];
        if internal && rest.starts_with("<^>") {
            out.push((Tok::LocalDiaOp, i));
            i += 3;
            continue;
        }
        if internal && rest.starts_with('?') {
            out.push((Tok::Question, i));
            i += 1;
            continue;
        }
        if let Some((s, t)) = fixed.iter().find(|(s, _)| rest.starts_with(s)) {
            out.push((t.clone(), i));
            i += s.len();
            continue;
        }
        if c.is_ascii_alphabetic() {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            let word = &rest[..len];
            let tok = match word {
                "false" => Tok::False,
                "true" => Tok::True,
                "mu" => Tok::Mu,
                "nu" => Tok::Nu,
                w if c.is_ascii_uppercase() => Tok::Upper(w.to_string()),
                w => Tok::Lower(w.to_string()),
            };
            out.push((tok, i));
            i += len;
            continue;
        }
        return Err(ParseError::Lexical {
            position: i,
            found: c,
        });
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            position: self.pos(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, t: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        match self.peek() {
            Tok::Arrow => {
                self.bump();
                Ok(Formula::implies(lhs, self.formula()?))
            }
            Tok::Question => {
                self.bump();
                Ok(Formula::query(lhs, self.or()?))
            }
            _ => Ok(lhs),
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::BoxOp => {
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Tok::DiaOp => {
                self.bump();
                Ok(Formula::dia(self.unary()?))
            }
            Tok::LocalDiaOp => {
                self.bump();
                Ok(Formula::local_dia(self.unary()?))
            }
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::False => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::True => {
                self.bump();
                Ok(Formula::top())
            }
            Tok::Lower(p) => {
                self.bump();
                Ok(Formula::Prop(p))
            }
            Tok::Upper(x) => {
                self.bump();
                Ok(Formula::Var(x))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Mu | Tok::Nu => {
                let mu = self.bump() == Tok::Mu;
                let x = match self.bump() {
                    Tok::Upper(x) => x,
                    _ => {
                        self.at -= 1;
                        return Err(self.error("an uppercase variable after the binder"));
                    }
                };
                self.expect(Tok::Dot, "'.'")?;
                let body = self.formula()?;
                Ok(if mu {
                    Formula::mu(&x, body)
                } else {
                    Formula::nu(&x, body)
                })
            }
            _ => Err(self.error("a formula")),
        }
    }
}

fn parse_with(text: &str, internal: bool) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text, internal)?,
        at: 0,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.error("end of input"));
    }
    Ok(f)
}

/// Parses the concrete syntax: `->` (right-associative), `|`, `&`, the unary
/// `[]`, `<>`, `~`, and binders `mu X. f` / `nu X. f` which extend as far right
/// as possible.
///
/// ```
/// use ckmu::syntax::{parse, Formula};
/// assert_eq!(parse("~p").unwrap(), Formula::implies(Formula::prop("p"), Formula::Bottom));
/// ```
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_with(text, false)
}

/// Like [`parse`], additionally accepting `<^>f` for the local diamond and
/// `a ? b` for implication queries. Used when reloading sequents and arenas.
pub fn parse_internal(text: &str) -> Result<Formula, ParseError> {
    parse_with(text, true)
}
