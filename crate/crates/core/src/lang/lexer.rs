use super::{LangError, Pos, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Lowercase identifier or numeral.
    Ident(String),
    /// Uppercase-initial identifier.
    Var(String),
    /// `#name`
    Directive(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    If,    // :-
    CrIf,  // +-
    Bar,   // |
    Minus, // -
    Ne,    // !=
    Eq,    // =
    At,    // @
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Directive(s) => format!("`#{s}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::If => "`:-`".into(),
            Tok::CrIf => "`+-`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::At => "`@`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let simple = match (c, next) {
            ('(', _) => Some((Tok::LParen, 1)),
            (')', _) => Some((Tok::RParen, 1)),
            (',', _) => Some((Tok::Comma, 1)),
            ('.', _) => Some((Tok::Dot, 1)),
            (':', Some('-')) => Some((Tok::If, 2)),
            (':', _) => Some((Tok::Colon, 1)),
            ('+', Some('-')) => Some((Tok::CrIf, 2)),
            ('|', _) => Some((Tok::Bar, 1)),
            ('-', _) => Some((Tok::Minus, 1)),
            ('!', Some('=')) => Some((Tok::Ne, 2)),
            ('=', _) => Some((Tok::Eq, 1)),
            ('@', _) => Some((Tok::At, 1)),
            _ => None,
        };
        if let Some((tok, len)) = simple {
            for _ in 0..len {
                bump!();
            }
            out.push((tok, pos));
            continue;
        }
        if c == '"' {
            bump!();
            let start = i;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    return Err(LangError::Syntax {
                        pos,
                        msg: "unterminated string".into(),
                    });
                }
                bump!();
            }
            if i >= chars.len() {
                return Err(LangError::Syntax {
                    pos,
                    msg: "unterminated string".into(),
                });
            }
            let s: String = chars[start..i].iter().collect();
            bump!();
            out.push((Tok::Str(s), pos));
            continue;
        }
        let is_word = |ch: char| ch.is_ascii_alphanumeric() || ch == '_';
        if c == '#' {
            bump!();
            let start = i;
            while i < chars.len() && is_word(chars[i]) {
                bump!();
            }
            if start == i {
                return Err(LangError::Syntax {
                    pos,
                    msg: "expected directive name after `#`".into(),
                });
            }
            out.push((Tok::Directive(chars[start..i].iter().collect()), pos));
            continue;
        }
        if is_word(c) {
            let start = i;
            while i < chars.len() && is_word(chars[i]) {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            let tok = if c.is_ascii_uppercase() || c == '_' {
                Tok::Var(word)
            } else {
                Tok::Ident(word)
            };
            out.push((tok, pos));
            continue;
        }
        return Err(LangError::Syntax {
            pos,
            msg: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
