use num_bigint::BigInt;

use super::lexer::{Tok, Token};
use super::{ModelError, ParseDiagnostic};

#[derive(Clone, Debug)]
pub(crate) enum Ast {
    Int(BigInt),
    Ident { name: String, line: usize, column: usize },
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, usize, usize),
    Pow(Box<Ast>, i64),
}

#[derive(Clone, Debug)]
pub(crate) struct Located<T> {
    pub value: T,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct RawMatrix {
    pub rows: Vec<Vec<Located<Ast>>>,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct RawModel {
    pub time: Option<Located<String>>,
    pub lists: Vec<(Located<String>, Vec<Located<String>>)>,
    pub matrices: Vec<(Located<String>, RawMatrix)>,
}

const LIST_KEYS: [&str; 5] = ["states", "inputs", "outputs", "params", "scheduling"];
const MATRIX_KEYS: [&str; 4] = ["A", "B", "C", "D"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

fn syntax(t: &Token, msg: String) -> ModelError {
    ModelError::Syntax(ParseDiagnostic::error(t.line, t.column, msg))
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    /// Inside brackets or parentheses line breaks are insignificant.
    fn skip_insignificant(&mut self) {
        if self.depth > 0 {
            while self.toks[self.pos].tok == Tok::Newline {
                self.pos += 1;
            }
        }
    }

    fn next(&mut self) -> Token {
        self.skip_insignificant();
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn peek_tok(&mut self) -> &Tok {
        self.skip_insignificant();
        &self.toks[self.pos].tok
    }

    fn expect(&mut self, want: Tok, ctx: &str) -> Result<Token, ModelError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(syntax(&t, format!("expected {} {ctx}, found {}", want.describe(), t.tok.describe())))
        }
    }

    fn end_of_statement(&mut self) -> Result<(), ModelError> {
        let t = self.next();
        match &t.tok {
            Tok::Newline | Tok::Semicolon | Tok::Eof => Ok(()),
            other => Err(syntax(&t, format!("expected end of statement, found {}", other.describe()))),
        }
    }

    fn model(&mut self) -> Result<RawModel, ModelError> {
        let mut m = RawModel::default();
        loop {
            let t = self.next();
            let key = match &t.tok {
                Tok::Eof => break,
                Tok::Newline | Tok::Semicolon => continue,
                Tok::Ident(s) => s.clone(),
                other => return Err(syntax(&t, format!("expected a statement keyword, found {}", other.describe()))),
            };
            let loc = Located { value: key.clone(), line: t.line, column: t.column };
            self.expect(Tok::Colon, &format!("after `{key}`"))?;
            if key == "time" {
                if m.time.is_some() {
                    return Err(syntax(&t, "duplicate `time` statement".into()));
                }
                let v = self.next();
                match &v.tok {
                    Tok::Ident(s) if s == "continuous" || s == "discrete" => {
                        m.time = Some(Located { value: s.clone(), line: v.line, column: v.column });
                    }
                    other => {
                        return Err(syntax(&v, format!("expected `continuous` or `discrete`, found {}", other.describe())))
                    }
                }
                self.end_of_statement()?;
            } else if LIST_KEYS.contains(&key.as_str()) {
                if m.lists.iter().any(|(k, _)| k.value == key) {
                    return Err(syntax(&t, format!("duplicate `{key}` statement")));
                }
                let names = self.name_list()?;
                m.lists.push((loc, names));
            } else if MATRIX_KEYS.contains(&key.as_str()) {
                if m.matrices.iter().any(|(k, _)| k.value == key) {
                    return Err(syntax(&t, format!("duplicate `{key}` statement")));
                }
                let mat = self.matrix()?;
                self.end_of_statement()?;
                m.matrices.push((loc, mat));
            } else {
                return Err(syntax(&t, format!("unknown statement `{key}`")));
            }
        }
        Ok(m)
    }

    fn name_list(&mut self) -> Result<Vec<Located<String>>, ModelError> {
        let mut names = Vec::new();
        if matches!(self.peek().tok, Tok::Newline | Tok::Semicolon | Tok::Eof) {
            self.next();
            return Ok(names);
        }
        loop {
            let t = self.next();
            match &t.tok {
                Tok::Ident(s) => names.push(Located { value: s.clone(), line: t.line, column: t.column }),
                other => return Err(syntax(&t, format!("expected a name, found {}", other.describe()))),
            }
            let sep = self.next();
            match &sep.tok {
                Tok::Comma => continue,
                Tok::Newline | Tok::Semicolon | Tok::Eof => break,
                other => return Err(syntax(&sep, format!("expected `,` or end of statement, found {}", other.describe()))),
            }
        }
        Ok(names)
    }

    fn matrix(&mut self) -> Result<RawMatrix, ModelError> {
        let open = self.expect(Tok::LBracket, "to open a matrix")?;
        self.depth += 1;
        let mut rows: Vec<Vec<Located<Ast>>> = Vec::new();
        if *self.peek_tok() == Tok::RBracket {
            self.next();
            self.depth -= 1;
            return Ok(RawMatrix { rows, line: open.line, column: open.column });
        }
        let mut row = Vec::new();
        loop {
            let start = {
                self.skip_insignificant();
                self.peek().clone()
            };
            let e = self.expr()?;
            row.push(Located { value: e, line: start.line, column: start.column });
            let sep = self.next();
            match &sep.tok {
                Tok::Comma => {}
                Tok::Semicolon => rows.push(std::mem::take(&mut row)),
                Tok::RBracket => {
                    rows.push(row);
                    break;
                }
                other => {
                    return Err(syntax(&sep, format!("expected `,`, `;` or `]` in matrix, found {}", other.describe())))
                }
            }
        }
        self.depth -= 1;
        let width = rows[0].len();
        for r in &rows {
            if r.len() != width {
                return Err(ModelError::DimensionMismatch(ParseDiagnostic::error(
                    r[0].line,
                    r[0].column,
                    format!("matrix row has {} entries, expected {width}", r.len()),
                )));
            }
        }
        Ok(RawMatrix { rows, line: open.line, column: open.column })
    }

    fn expr(&mut self) -> Result<Ast, ModelError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek_tok() {
                Tok::Plus => {
                    self.next();
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.next();
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ModelError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek_tok() {
                Tok::Star => {
                    self.next();
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    let t = self.next();
                    lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?), t.line, t.column);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, ModelError> {
        match self.peek_tok() {
            Tok::Minus => {
                self.next();
                Ok(Ast::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast, ModelError> {
        let base = self.atom()?;
        if *self.peek_tok() != Tok::Caret {
            return Ok(base);
        }
        self.next();
        let negative = if *self.peek_tok() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let t = self.next();
        let Tok::Int(n) = &t.tok else {
            return Err(syntax(&t, format!("expected an integer exponent, found {}", t.tok.describe())));
        };
        let e: i64 = n
            .try_into()
            .ok()
            .filter(|e: &i64| *e <= u32::MAX as i64)
            .ok_or_else(|| syntax(&t, "exponent too large".into()))?;
        Ok(Ast::Pow(Box::new(base), if negative { -e } else { e }))
    }

    fn atom(&mut self) -> Result<Ast, ModelError> {
        let t = self.next();
        match &t.tok {
            Tok::Int(n) => Ok(Ast::Int(n.clone())),
            Tok::Ident(name) => Ok(Ast::Ident { name: name.clone(), line: t.line, column: t.column }),
            Tok::LParen => {
                self.depth += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "to close `(`")?;
                self.depth -= 1;
                Ok(e)
            }
            other => Err(syntax(&t, format!("expected an expression, found {}", other.describe()))),
        }
    }
}

pub(crate) fn parse(tokens: Vec<Token>) -> Result<RawModel, ModelError> {
    Parser { toks: tokens, pos: 0, depth: 0 }.model()
}
