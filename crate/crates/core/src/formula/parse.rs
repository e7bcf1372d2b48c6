use thiserror::Error;

use super::{Agent, Formula, Signature};

/// Parse failures. Positions are 1-based character columns.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at column {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown atom `{name}` at column {position}")]
    UnknownAtom { name: String, position: usize },
    #[error("agent {agent} at column {position} is out of range 1..={agents}")]
    AgentOutOfRange {
        agent: Agent,
        agents: usize,
        position: usize,
    },
    #[error("bare `K` at column {position} needs a single-agent signature; write `Ki`")]
    BareKnowledge { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    Iff,
    True,
    False,
    /// `K` (None) or `Ki`.
    Know(Option<Agent>),
    Ident(String),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Not => "`~`".into(),
            Token::And => "`&`".into(),
            Token::Or => "`|`".into(),
            Token::Implies => "`->`".into(),
            Token::Iff => "`<->`".into(),
            Token::True => "`true`".into(),
            Token::False => "`false`".into(),
            Token::Know(None) => "`K`".into(),
            Token::Know(Some(i)) => format!("`K{i}`"),
            Token::Ident(s) => format!("atom `{s}`"),
        }
    }
}

pub(crate) fn is_atom_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && keyword(s).is_none()
}

fn keyword(s: &str) -> Option<Token> {
    match s {
        "true" => Some(Token::True),
        "false" => Some(Token::False),
        "K" => Some(Token::Know(None)),
        _ => {
            let digits = s.strip_prefix('K')?;
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                // Oversized indices are caught by the range check later.
                Some(Token::Know(Some(digits.parse().unwrap_or(usize::MAX))))
            } else {
                None
            }
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '(' => Token::LParen,
            ')' => Token::RParen,
            '~' => Token::Not,
            '&' => Token::And,
            '|' => Token::Or,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Token::Implies
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                i += 2;
                Token::Iff
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i + 1 < chars.len()
                    && (chars[i + 1].is_ascii_alphanumeric() || chars[i + 1] == '_')
                {
                    i += 1;
                }
                let word: String = chars[start..=i].iter().collect();
                keyword(&word).unwrap_or(Token::Ident(word))
            }
            other => {
                return Err(ParseError::Syntax {
                    position: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, col));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    sig: Option<&'a Signature>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, c)| *c)
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = self
            .peek()
            .map_or_else(|| "end of input".to_string(), Token::describe);
        ParseError::Syntax {
            position: self.column(),
            message: format!("expected {wanted}, found {found}"),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while self.eat(&Token::Iff) {
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Token::Implies) {
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Token::Or) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::And) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let col = self.column();
        match self.peek().cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Token::Know(index)) => {
                self.pos += 1;
                let agent = self.agent(index, col)?;
                Ok(Formula::know(agent, self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn agent(&self, index: Option<Agent>, position: usize) -> Result<Agent, ParseError> {
        match (index, self.sig) {
            (None, None) => Ok(1),
            (None, Some(sig)) if sig.agents() == 1 => Ok(1),
            (None, Some(_)) => Err(ParseError::BareKnowledge { position }),
            (Some(0), sig) => Err(ParseError::AgentOutOfRange {
                agent: 0,
                agents: sig.map_or(usize::MAX, Signature::agents),
                position,
            }),
            (Some(i), Some(sig)) if i > sig.agents() => Err(ParseError::AgentOutOfRange {
                agent: i,
                agents: sig.agents(),
                position,
            }),
            (Some(i), _) => Ok(i),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let col = self.column();
        match self.peek().cloned() {
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.unexpected("`)`"));
                }
                Ok(inner)
            }
            Some(Token::True) => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(Token::False) => {
                self.pos += 1;
                Ok(Formula::Bot)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if let Some(sig) = self.sig {
                    if !sig.contains_atom(&name) {
                        return Err(ParseError::UnknownAtom {
                            name,
                            position: col,
                        });
                    }
                }
                Ok(Formula::atom(&name))
            }
            _ => Err(self.unexpected("a formula")),
        }
    }
}

fn run(text: &str, sig: Option<&Signature>) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.chars().count() + 1,
        sig,
    };
    let f = parser.iff()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.unexpected("end of input"));
    }
    Ok(f)
}

/// Parses `text` as a formula over `sig`.
///
/// Precedence from loosest to tightest: `<->`, `->` (right associative),
/// `|`, `&`, then the prefix operators `~` and `Ki`. A bare `K` means `K1`
/// and is only accepted when `sig` has a single agent.
pub fn parse(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    run(text, Some(sig))
}

/// Parses without a fixed signature and returns the smallest signature
/// covering the result (with at least `min_agents` agents). Bare `K` is `K1`.
pub fn parse_open(text: &str, min_agents: usize) -> Result<(Formula, Signature), ParseError> {
    let f = run(text, None)?;
    let sig = Signature::covering([&f], min_agents);
    Ok((f, sig))
}
