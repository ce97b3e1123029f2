use super::PddlError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Sym(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Sym(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn sym(&self) -> Option<&str> {
        match self {
            Sexp::Sym(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Sym(..) => None,
        }
    }

    /// First element of a list when it is a symbol, e.g. `and` in `(and ...)`.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::sym)
    }

    pub fn error(&self, msg: impl Into<String>) -> PddlError {
        let p = self.pos();
        PddlError::Syntax { line: p.line, col: p.col, msg: msg.into() }
    }
}

/// Reads exactly one top-level expression. PDDL is case-insensitive, so
/// symbols are lowercased.
pub fn read(text: &str) -> Result<Sexp, PddlError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top: Option<Sexp> = None;
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    let mut tok = String::new();
    let mut tok_pos = Pos { line, col };

    fn flush(tok: &mut String, pos: Pos, stack: &mut [(Vec<Sexp>, Pos)]) -> Result<(), PddlError> {
        if tok.is_empty() {
            return Ok(());
        }
        let sym = Sexp::Sym(std::mem::take(tok).to_lowercase(), pos);
        match stack.last_mut() {
            Some((items, _)) => items.push(sym),
            None => {
                return Err(PddlError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    msg: "symbol outside of any expression".into(),
                })
            }
        }
        Ok(())
    }

    while let Some(c) = chars.next() {
        let here = Pos { line, col };
        match c {
            ';' => {
                flush(&mut tok, tok_pos, &mut stack)?;
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                flush(&mut tok, tok_pos, &mut stack)?;
                if stack.is_empty() && top.is_some() {
                    return Err(PddlError::Syntax {
                        line,
                        col,
                        msg: "trailing input after the top-level expression".into(),
                    });
                }
                stack.push((Vec::new(), here));
            }
            ')' => {
                flush(&mut tok, tok_pos, &mut stack)?;
                let (items, pos) = stack.pop().ok_or(PddlError::Syntax {
                    line,
                    col,
                    msg: "unbalanced `)`".into(),
                })?;
                let e = Sexp::List(items, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(e),
                    None => top = Some(e),
                }
            }
            c if c.is_whitespace() => flush(&mut tok, tok_pos, &mut stack)?,
            c => {
                if tok.is_empty() {
                    tok_pos = here;
                }
                tok.push(c);
            }
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    flush(&mut tok, tok_pos, &mut stack)?;
    if let Some((_, pos)) = stack.last() {
        return Err(PddlError::Syntax {
            line: pos.line,
            col: pos.col,
            msg: "unclosed `(`".into(),
        });
    }
    top.ok_or(PddlError::Syntax { line, col, msg: "empty input".into() })
}
