//! Concrete syntax: class declarations in any order followed by exactly one
//! main expression.
//!
//! The grammar is whitespace-insensitive and allows `//` line comments.
//! Method invocation is the symmetric, receiver-free form `m(e1, ..., en)`;
//! the receiver form `e.m(...)` is rejected outright. Casts bind tighter
//! than field access, so `(A) x.f` reads as `((A) x).f`; parentheses may be
//! used to group, as in `(A) (x.f)`.

use thiserror::Error;

use crate::ast::{ClassDecl, ClassName, ConstructorDecl, Expr, MethodBranch};
use crate::span::{Span, SpanMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: missing main expression")]
    MissingMainExpression { line: u32, col: u32 },
    #[error("{line}:{col}: trailing input after main expression")]
    TrailingInput { line: u32, col: u32 },
}

impl ParseError {
    fn syntax(span: Span, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: span.line,
            col: span.col,
            msg: msg.into(),
        }
    }
}

/// Parse result: declarations in source order, the main expression, and
/// spans for diagnostics.
#[derive(Debug, Clone)]
pub struct ParsedProgram {
    pub decls: Vec<ClassDecl>,
    pub main: Expr,
    pub spans: SpanMap,
}

/// Parses a whole program (class declarations, then one expression).
pub fn parse_program(src: &str) -> Result<ParsedProgram, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut decls = Vec::new();
    let mut spans = SpanMap::default();
    while p.peek_kind() == &TokKind::KwClass {
        let class = p.class_decl()?;
        decls.push(class.decl);
        spans.classes.push(class.span);
        spans.methods.push(class.method_spans);
        spans.bodies.push(class.body_spans);
    }
    if p.peek_kind() == &TokKind::Eof {
        let sp = p.peek_span();
        return Err(ParseError::MissingMainExpression {
            line: sp.line,
            col: sp.col,
        });
    }
    let main = p.expr()?;
    if p.peek_kind() != &TokKind::Eof {
        let sp = p.peek_span();
        return Err(ParseError::TrailingInput {
            line: sp.line,
            col: sp.col,
        });
    }
    let main = lower_expr(main, &mut spans.main);
    Ok(ParsedProgram { decls, main, spans })
}

/// Parses a single expression spanning the entire input.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let spanned = p.expr()?;
    if p.peek_kind() != &TokKind::Eof {
        let sp = p.peek_span();
        return Err(ParseError::TrailingInput {
            line: sp.line,
            col: sp.col,
        });
    }
    let mut spans = Vec::new();
    Ok(lower_expr(spanned, &mut spans))
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokKind {
    Ident(String),
    KwClass,
    KwExtends,
    KwNew,
    KwReturn,
    KwSuper,
    KwThis,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Assign,
    Eof,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    span: Span,
}

fn lex(src: &str) -> Result<Vec<Tok>, ParseError> {
    let mut toks = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let span = Span::new(line, col);
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
            '/' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        chars.next();
                        col += 1;
                    }
                } else {
                    return Err(ParseError::syntax(span, "unexpected character `/`"));
                }
            }
            '{' | '}' | '(' | ')' | ',' | ';' | '.' | '=' => {
                chars.next();
                col += 1;
                let kind = match c {
                    '{' => TokKind::LBrace,
                    '}' => TokKind::RBrace,
                    '(' => TokKind::LParen,
                    ')' => TokKind::RParen,
                    ',' => TokKind::Comma,
                    ';' => TokKind::Semi,
                    '.' => TokKind::Dot,
                    _ => TokKind::Assign,
                };
                toks.push(Tok { kind, span });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let kind = match ident.as_str() {
                    "class" => TokKind::KwClass,
                    "extends" => TokKind::KwExtends,
                    "new" => TokKind::KwNew,
                    "return" => TokKind::KwReturn,
                    "super" => TokKind::KwSuper,
                    "this" => TokKind::KwThis,
                    "void" => {
                        return Err(ParseError::syntax(
                            span,
                            "there is no `void` type; methods return an expression",
                        ))
                    }
                    _ => TokKind::Ident(ident),
                };
                toks.push(Tok { kind, span });
            }
            other => {
                return Err(ParseError::syntax(
                    span,
                    format!("unexpected character `{other}`"),
                ));
            }
        }
    }
    toks.push(Tok {
        kind: TokKind::Eof,
        span: Span::new(line, col),
    });
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// Expression with per-node spans, lowered to the plain AST after parsing.
struct SpannedExpr {
    span: Span,
    kind: SpannedKind,
}

enum SpannedKind {
    Var(String),
    Field(Box<SpannedExpr>, String),
    Invoke(String, Vec<SpannedExpr>),
    New(ClassName, Vec<SpannedExpr>),
    Cast(ClassName, Box<SpannedExpr>),
}

/// Emits pre-order spans while converting to the span-free AST.
fn lower_expr(e: SpannedExpr, out: &mut Vec<Span>) -> Expr {
    out.push(e.span);
    match e.kind {
        SpannedKind::Var(x) => Expr::Var(x),
        SpannedKind::Field(inner, f) => Expr::FieldAccess(Box::new(lower_expr(*inner, out)), f),
        SpannedKind::Invoke(m, args) => {
            Expr::Invoke(m, args.into_iter().map(|a| lower_expr(a, out)).collect())
        }
        SpannedKind::New(c, args) => {
            Expr::New(c, args.into_iter().map(|a| lower_expr(a, out)).collect())
        }
        SpannedKind::Cast(c, inner) => Expr::Cast(c, Box::new(lower_expr(*inner, out))),
    }
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

/// One parsed declaration with the spans diagnostics will want.
struct ParsedClass {
    decl: ClassDecl,
    span: Span,
    method_spans: Vec<Span>,
    body_spans: Vec<Vec<Span>>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_kind(&self) -> &TokKind {
        &self.peek().kind
    }

    fn peek_at(&self, offset: usize) -> &TokKind {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn peek_span(&self) -> Span {
        self.peek().span
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: TokKind, what: &str) -> Result<Tok, ParseError> {
        if self.peek_kind() == &kind {
            Ok(self.bump())
        } else {
            Err(ParseError::syntax(
                self.peek_span(),
                format!("expected {what}"),
            ))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        let sp = self.peek_span();
        match self.peek_kind().clone() {
            TokKind::Ident(name) => {
                self.bump();
                Ok((name, sp))
            }
            _ => Err(ParseError::syntax(sp, format!("expected {what}"))),
        }
    }

    fn class_decl(&mut self) -> Result<ParsedClass, ParseError> {
        let class_span = self.peek_span();
        self.expect(TokKind::KwClass, "`class`")?;
        let (name, _) = self.ident("class name")?;
        self.expect(TokKind::KwExtends, "`extends`")?;
        let (parent, _) = self.ident("parent class name")?;
        self.expect(TokKind::LBrace, "`{`")?;

        // Fields: `Type name;` until the constructor's `Name(` shape appears.
        let mut fields = Vec::new();
        while let (TokKind::Ident(_), TokKind::Ident(_), TokKind::Semi) =
            (self.peek_at(0), self.peek_at(1), self.peek_at(2))
        {
            let (ty, _) = self.ident("field type")?;
            let (fname, _) = self.ident("field name")?;
            self.expect(TokKind::Semi, "`;`")?;
            fields.push((ClassName::new(ty), fname));
        }

        let ctor = self.constructor()?;

        let mut methods = Vec::new();
        let mut method_spans = Vec::new();
        let mut body_spans = Vec::new();
        while matches!(self.peek_kind(), TokKind::Ident(_)) {
            let mspan = self.peek_span();
            let (branch, spans) = self.method(&name)?;
            methods.push(branch);
            method_spans.push(mspan);
            body_spans.push(spans);
        }

        self.expect(TokKind::RBrace, "`}`")?;
        let decl = ClassDecl {
            name: ClassName::new(name),
            parent: ClassName::new(parent),
            fields,
            ctor,
            methods,
        };
        Ok(ParsedClass {
            decl,
            span: class_span,
            method_spans,
            body_spans,
        })
    }

    fn constructor(&mut self) -> Result<ConstructorDecl, ParseError> {
        let (name, _) = self.ident("constructor")?;
        self.expect(TokKind::LParen, "`(`")?;
        let params = self.typed_params()?;
        self.expect(TokKind::RParen, "`)`")?;
        self.expect(TokKind::LBrace, "`{`")?;
        self.expect(TokKind::KwSuper, "`super`")?;
        self.expect(TokKind::LParen, "`(`")?;
        let mut super_args = Vec::new();
        if self.peek_kind() != &TokKind::RParen {
            loop {
                let (arg, _) = self.ident("super argument")?;
                super_args.push(arg);
                if self.peek_kind() == &TokKind::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokKind::RParen, "`)`")?;
        self.expect(TokKind::Semi, "`;`")?;
        let mut inits = Vec::new();
        while self.peek_kind() == &TokKind::KwThis {
            self.bump();
            self.expect(TokKind::Dot, "`.`")?;
            let (field, _) = self.ident("field name")?;
            self.expect(TokKind::Assign, "`=`")?;
            let (param, _) = self.ident("parameter name")?;
            self.expect(TokKind::Semi, "`;`")?;
            inits.push((field, param));
        }
        self.expect(TokKind::RBrace, "`}`")?;
        Ok(ConstructorDecl {
            name: ClassName::new(name),
            params,
            super_args,
            inits,
        })
    }

    fn method(&mut self, owner: &str) -> Result<(MethodBranch, Vec<Span>), ParseError> {
        let (return_type, _) = self.ident("return type")?;
        let (name, name_span) = self.ident("method name")?;
        self.expect(TokKind::LParen, "`(`")?;
        let params = self.typed_params()?;
        if params.is_empty() {
            return Err(ParseError::syntax(
                name_span,
                "methods need at least one parameter (every call dispatches on its arguments)",
            ));
        }
        self.expect(TokKind::RParen, "`)`")?;
        self.expect(TokKind::LBrace, "`{`")?;
        self.expect(TokKind::KwReturn, "`return`")?;
        let body = self.expr()?;
        self.expect(TokKind::Semi, "`;`")?;
        self.expect(TokKind::RBrace, "`}`")?;
        let mut spans = Vec::new();
        let body = lower_expr(body, &mut spans);
        Ok((
            MethodBranch {
                owner: ClassName::new(owner),
                name,
                params,
                return_type: ClassName::new(return_type),
                body,
            },
            spans,
        ))
    }

    fn typed_params(&mut self) -> Result<Vec<(ClassName, String)>, ParseError> {
        let mut params = Vec::new();
        if self.peek_kind() == &TokKind::RParen {
            return Ok(params);
        }
        loop {
            let (ty, _) = self.ident("parameter type")?;
            let (name, _) = self.ident("parameter name")?;
            params.push((ClassName::new(ty), name));
            if self.peek_kind() == &TokKind::Comma {
                self.bump();
            } else {
                break;
            }
        }
        Ok(params)
    }

    /// expr := atom (`.` field)* — postfix field access over atoms, with
    /// receiver invocation `e.m(...)` rejected explicitly.
    fn expr(&mut self) -> Result<SpannedExpr, ParseError> {
        let mut e = self.atom()?;
        while self.peek_kind() == &TokKind::Dot {
            let dot_span = self.peek_span();
            self.bump();
            let (field, fspan) = self.ident("field name")?;
            if self.peek_kind() == &TokKind::LParen {
                return Err(ParseError::syntax(
                    fspan,
                    format!(
                        "receiver invocation syntax is not supported; write \
                         `{field}(receiver, ...)` instead"
                    ),
                ));
            }
            e = SpannedExpr {
                span: dot_span,
                kind: SpannedKind::Field(Box::new(e), field),
            };
        }
        Ok(e)
    }

    /// atom := `new C(args)` | cast | invocation | variable | `(` expr `)`
    fn atom(&mut self) -> Result<SpannedExpr, ParseError> {
        let span = self.peek_span();
        match self.peek_kind().clone() {
            TokKind::KwNew => {
                self.bump();
                let (class, _) = self.ident("class name")?;
                self.expect(TokKind::LParen, "`(`")?;
                let args = self.args()?;
                self.expect(TokKind::RParen, "`)`")?;
                Ok(SpannedExpr {
                    span,
                    kind: SpannedKind::New(ClassName::new(class), args),
                })
            }
            TokKind::Ident(name) => {
                self.bump();
                if self.peek_kind() == &TokKind::LParen {
                    self.bump();
                    let args = self.args()?;
                    if args.is_empty() {
                        return Err(ParseError::syntax(
                            span,
                            format!("invocation `{name}()` needs at least one argument"),
                        ));
                    }
                    self.expect(TokKind::RParen, "`)`")?;
                    Ok(SpannedExpr {
                        span,
                        kind: SpannedKind::Invoke(name, args),
                    })
                } else {
                    Ok(SpannedExpr {
                        span,
                        kind: SpannedKind::Var(name),
                    })
                }
            }
            TokKind::LParen => {
                // `(C) e` is a cast when `(IDENT)` is followed by something
                // that can start an expression; otherwise `( ... )` groups.
                if let (TokKind::Ident(_), TokKind::RParen) = (self.peek_at(1), self.peek_at(2)) {
                    if matches!(
                        self.peek_at(3),
                        TokKind::Ident(_) | TokKind::KwNew | TokKind::LParen
                    ) {
                        self.bump(); // `(`
                        let (class, _) = self.ident("class name")?;
                        self.bump(); // `)`
                        let inner = self.atom()?;
                        return Ok(SpannedExpr {
                            span,
                            kind: SpannedKind::Cast(ClassName::new(class), Box::new(inner)),
                        });
                    }
                }
                self.bump();
                let inner = self.expr()?;
                self.expect(TokKind::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(ParseError::syntax(span, "expected an expression")),
        }
    }

    fn args(&mut self) -> Result<Vec<SpannedExpr>, ParseError> {
        let mut args = Vec::new();
        if self.peek_kind() == &TokKind::RParen {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.peek_kind() == &TokKind::Comma {
                self.bump();
            } else {
                break;
            }
        }
        Ok(args)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Expr;

    #[test]
    fn parses_a_one_class_program() {
        let parsed = parse_program(
            "class A extends Object { A() { super(); } Object m(A a, Object b) { return b; } } \
             m(new A(), new Object())",
        )
        .unwrap();
        assert_eq!(parsed.decls.len(), 1);
        let decl = &parsed.decls[0];
        assert_eq!(decl.name.as_str(), "A");
        assert_eq!(decl.parent.as_str(), "Object");
        assert_eq!(decl.methods.len(), 1);
        assert_eq!(decl.methods[0].signature(), "A.m(A, Object)");
        assert_eq!(decl.methods[0].body, Expr::var("b"));
        assert_eq!(
            parsed.main,
            Expr::invoke(
                "m",
                vec![
                    Expr::new_object("A", vec![]),
                    Expr::new_object("Object", vec![]),
                ]
            )
        );
    }

    #[test]
    fn parses_the_minimal_program() {
        let parsed = parse_program("new Object()").unwrap();
        assert!(parsed.decls.is_empty());
        assert_eq!(parsed.main, Expr::new_object("Object", vec![]));
    }

    #[test]
    fn void_is_not_a_type() {
        let err = parse_program(
            "class A extends Object { A() { super(); } void m(A a) { return new Object(); } } \
             new Object()",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err}");
        assert!(err.to_string().contains("void"));
    }

    #[test]
    fn parses_the_symmetric_call_form() {
        let e = parse_expr("transaction(s, i, c)").unwrap();
        assert_eq!(
            e,
            Expr::invoke(
                "transaction",
                vec![Expr::var("s"), Expr::var("i"), Expr::var("c")]
            )
        );
    }

    #[test]
    fn parses_a_cast_of_a_variable() {
        assert_eq!(
            parse_expr("(Shop) x").unwrap(),
            Expr::cast("Shop", Expr::var("x"))
        );
    }

    #[test]
    fn field_access_binds_to_the_new_expression() {
        assert_eq!(
            parse_expr("new Pair(new A(), new B()).fst").unwrap(),
            Expr::field(
                Expr::new_object(
                    "Pair",
                    vec![Expr::new_object("A", vec![]), Expr::new_object("B", vec![])]
                ),
                "fst"
            )
        );
    }

    #[test]
    fn cast_binds_tighter_than_field_access() {
        assert_eq!(
            parse_expr("(A) x.f").unwrap(),
            Expr::field(Expr::cast("A", Expr::var("x")), "f")
        );
    }

    #[test]
    fn receiver_invocation_syntax_is_rejected() {
        let err = parse_expr("shop.transaction(item, customer)").unwrap_err();
        assert!(err.to_string().contains("receiver"), "{err}");
        assert!(parse_program("class A extends Object { A() { super(); } } x.m(y)").is_err());
    }

    #[test]
    fn zero_argument_invocation_is_rejected() {
        let err = parse_expr("m()").unwrap_err();
        assert!(err.to_string().contains("at least one argument"), "{err}");
    }

    #[test]
    fn zero_parameter_methods_are_rejected() {
        let err = parse_program(
            "class A extends Object { A() { super(); } Object m() { return new Object(); } } \
             new Object()",
        )
        .unwrap_err();
        assert!(err.to_string().contains("at least one parameter"), "{err}");
    }

    #[test]
    fn missing_main_expression_is_its_own_error() {
        let err = parse_program("class A extends Object { A() { super(); } }").unwrap_err();
        assert!(matches!(err, ParseError::MissingMainExpression { .. }));
        assert!(matches!(
            parse_program(""),
            Err(ParseError::MissingMainExpression { .. })
        ));
    }

    #[test]
    fn trailing_input_is_rejected() {
        let err = parse_program("new Object() new Object()").unwrap_err();
        assert!(matches!(err, ParseError::TrailingInput { .. }));
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let parsed = parse_program(
            "// header comment\nclass A extends Object { // trailing\n  A() { super(); }\n}\n\nnew A() // tail",
        )
        .unwrap();
        assert_eq!(parsed.decls.len(), 1);
        assert_eq!(parsed.main, Expr::new_object("A", vec![]));
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err =
            parse_program("class A extends Object {\n  A() { super(); }\n  ?\n}").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => {
                assert_eq!(line, 3);
                assert_eq!(col, 3);
            }
            other => panic!("expected a syntax error, got {other}"),
        }
    }

    #[test]
    fn main_spans_are_pre_order_per_node() {
        let parsed = parse_program("m(new A(), x.f)").unwrap();
        assert_eq!(parsed.spans.main.len(), parsed.main.size());
        // The root invocation starts at 1:1.
        assert_eq!(parsed.spans.main[0], crate::span::Span::new(1, 1));
    }

    #[test]
    fn grouping_parentheses_are_allowed() {
        assert_eq!(
            parse_expr("(A) (x.f)").unwrap(),
            Expr::cast("A", Expr::field(Expr::var("x"), "f"))
        );
        assert_eq!(
            parse_expr("(x).f").unwrap(),
            Expr::field(Expr::var("x"), "f")
        );
        // A parenthesized identifier followed by an expression start is a
        // cast; otherwise it is grouping.
        assert_eq!(parse_expr("(A)").unwrap(), Expr::var("A"));
        assert_eq!(
            parse_expr("(A) (B) x").unwrap(),
            Expr::cast("A", Expr::cast("B", Expr::var("x")))
        );
    }
}
