use super::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Atom(String),
    Quoted(String),
    Var(String),
    /// Magnitude only; the parser applies a leading minus and range-checks.
    Int(i128),
    Real(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Neck,
    Op(&'static str),
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Atom(a) => format!("atom `{a}`"),
            Tok::Quoted(a) => format!("quoted atom '{a}'"),
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Int(i) => format!("number `{i}`"),
            Tok::Real(r) => format!("number `{r}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::Op(o) => format!("`{o}`"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

pub(crate) struct Lexed {
    pub tokens: Vec<(Tok, Pos)>,
    pub end: Pos,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, column: self.column }
    }
}

fn err(kind: ParseErrorKind, pos: Pos) -> ParseError {
    ParseError { kind, line: pos.line, column: pos.column }
}

pub(crate) fn lex(source: &str) -> Result<Lexed, ParseError> {
    let mut cur = Cursor { chars: source.chars().peekable(), line: 1, column: 1 };
    let mut tokens = Vec::new();
    while let Some(c) = cur.peek() {
        let start = cur.pos();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let tok = match c {
            '(' => single(&mut cur, Tok::LParen),
            ')' => single(&mut cur, Tok::RParen),
            '[' => single(&mut cur, Tok::LBracket),
            ']' => single(&mut cur, Tok::RBracket),
            ',' => single(&mut cur, Tok::Comma),
            '.' => single(&mut cur, Tok::Dot),
            '+' => single(&mut cur, Tok::Op("+")),
            '-' => single(&mut cur, Tok::Op("-")),
            '*' => single(&mut cur, Tok::Op("*")),
            '/' => single(&mut cur, Tok::Op("/")),
            ':' => {
                cur.bump();
                if cur.peek() == Some('-') {
                    cur.bump();
                    Tok::Neck
                } else {
                    return Err(err(ParseErrorKind::UnexpectedChar(':'), start));
                }
            }
            '>' | '<' => {
                cur.bump();
                if cur.peek() == Some('=') {
                    cur.bump();
                    Tok::Op(if c == '>' { ">=" } else { "<=" })
                } else {
                    Tok::Op(if c == '>' { ">" } else { "<" })
                }
            }
            '=' => {
                cur.bump();
                if cur.peek() == Some('<') {
                    cur.bump();
                    Tok::Op("<=")
                } else {
                    Tok::Op("=")
                }
            }
            '\\' => {
                cur.bump();
                match cur.peek() {
                    Some('=') => {
                        cur.bump();
                        Tok::Op("\\=")
                    }
                    // `\_` is how the anonymous variable appears in typeset listings.
                    Some('_') => lex_word(&mut cur),
                    _ => return Err(err(ParseErrorKind::UnexpectedChar('\\'), start)),
                }
            }
            '\'' => lex_quoted(&mut cur, start)?,
            c if c.is_ascii_digit() => lex_number(&mut cur, start)?,
            c if c.is_alphabetic() || c == '_' => lex_word(&mut cur),
            other => return Err(err(ParseErrorKind::UnexpectedChar(other), start)),
        };
        tokens.push((tok, start));
    }
    Ok(Lexed { tokens, end: cur.pos() })
}

fn single(cur: &mut Cursor<'_>, tok: Tok) -> Tok {
    cur.bump();
    tok
}

fn lex_word(cur: &mut Cursor<'_>) -> Tok {
    let mut s = String::new();
    while let Some(c) = cur.peek() {
        if c.is_alphanumeric() || c == '_' {
            s.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    let first = s.chars().next().unwrap_or('_');
    if first.is_uppercase() || first == '_' {
        Tok::Var(s)
    } else {
        Tok::Atom(s)
    }
}

fn lex_quoted(cur: &mut Cursor<'_>, start: Pos) -> Result<Tok, ParseError> {
    cur.bump();
    let mut s = String::new();
    loop {
        match cur.bump() {
            None => return Err(err(ParseErrorKind::UnterminatedQuote, start)),
            Some('\'') => {
                if cur.peek() == Some('\'') {
                    cur.bump();
                    s.push('\'');
                } else {
                    return Ok(Tok::Quoted(s));
                }
            }
            Some('\\') => match cur.bump() {
                Some('n') => s.push('\n'),
                Some('t') => s.push('\t'),
                Some(c @ ('\\' | '\'')) => s.push(c),
                Some(c) => {
                    s.push('\\');
                    s.push(c);
                }
                None => return Err(err(ParseErrorKind::UnterminatedQuote, start)),
            },
            Some(c) => s.push(c),
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>, start: Pos) -> Result<Tok, ParseError> {
    let mut s = String::new();
    let mut real = false;
    let digits = |cur: &mut Cursor<'_>, s: &mut String| {
        while let Some(c) = cur.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                cur.bump();
            } else {
                break;
            }
        }
    };
    digits(cur, &mut s);
    if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
        real = true;
        s.push('.');
        cur.bump();
        digits(cur, &mut s);
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let mut look = cur.chars.clone();
        look.next();
        let mut sign = None;
        let mut next = look.next();
        if matches!(next, Some('+' | '-')) {
            sign = next;
            next = look.next();
        }
        if next.is_some_and(|c| c.is_ascii_digit()) {
            real = true;
            s.push('e');
            cur.bump();
            if let Some(sg) = sign {
                s.push(sg);
                cur.bump();
            }
            digits(cur, &mut s);
        }
    }
    if real {
        s.parse::<f64>()
            .map(Tok::Real)
            .map_err(|_| err(ParseErrorKind::BadNumber(s.clone()), start))
    } else {
        s.parse::<u64>()
            .map(|v| Tok::Int(v.into()))
            .map_err(|_| err(ParseErrorKind::BadNumber(s.clone()), start))
    }
}
