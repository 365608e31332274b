use super::PddlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    LParen,
    RParen,
    Symbol(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

/// Tokenize s-expression text. `;` starts a comment running to end of line.
pub(crate) fn lex(text: &str) -> Result<Vec<Token>, PddlError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                out.push(Token { tok: Tok::LParen, line, col });
                chars.next();
                col += 1;
            }
            ')' => {
                out.push(Token { tok: Tok::RParen, line, col });
                chars.next();
                col += 1;
            }
            _ => {
                let start_col = col;
                let mut sym = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    sym.push(c);
                    chars.next();
                    col += 1;
                }
                out.push(Token {
                    tok: Tok::Symbol(sym),
                    line,
                    col: start_col,
                });
            }
        }
    }
    Ok(out)
}

/// A parsed s-expression tree with source positions on every node.
#[derive(Debug, Clone)]
pub(crate) enum Sexpr {
    Sym(String, u32, u32),
    List(Vec<Sexpr>, u32, u32),
}

impl Sexpr {
    pub fn pos(&self) -> (u32, u32) {
        match self {
            Sexpr::Sym(_, l, c) | Sexpr::List(_, l, c) => (*l, *c),
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Sexpr::Sym(s, _, _) => Some(s),
            Sexpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items, _, _) => Some(items),
            Sexpr::Sym(..) => None,
        }
    }

    /// Head symbol of a list, lowercased (keywords are case-insensitive).
    pub fn head(&self) -> Option<String> {
        self.as_list()
            .and_then(|items| items.first())
            .and_then(|h| h.as_sym())
            .map(|s| s.to_ascii_lowercase())
    }
}

pub(crate) fn err_at(pos: (u32, u32), message: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        line: pos.0,
        col: pos.1,
        message: message.into(),
    }
}

/// Parse the full token stream into one s-expression.
pub(crate) fn parse_sexpr(text: &str) -> Result<Sexpr, PddlError> {
    let tokens = lex(text)?;
    let mut idx = 0;
    let expr = parse_one(&tokens, &mut idx)?;
    if idx != tokens.len() {
        let t = &tokens[idx];
        return Err(err_at((t.line, t.col), "trailing tokens after expression"));
    }
    Ok(expr)
}

fn parse_one(tokens: &[Token], idx: &mut usize) -> Result<Sexpr, PddlError> {
    let Some(t) = tokens.get(*idx) else {
        return Err(err_at((0, 0), "unexpected end of input"));
    };
    match &t.tok {
        Tok::Symbol(s) => {
            *idx += 1;
            Ok(Sexpr::Sym(s.clone(), t.line, t.col))
        }
        Tok::LParen => {
            let (line, col) = (t.line, t.col);
            *idx += 1;
            let mut items = Vec::new();
            loop {
                match tokens.get(*idx) {
                    None => return Err(err_at((line, col), "unclosed `(`")),
                    Some(t) if t.tok == Tok::RParen => {
                        *idx += 1;
                        return Ok(Sexpr::List(items, line, col));
                    }
                    Some(_) => items.push(parse_one(tokens, idx)?),
                }
            }
        }
        Tok::RParen => Err(err_at((t.line, t.col), "unexpected `)`")),
    }
}
