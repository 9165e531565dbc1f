//! Scenario text → [`ScenarioScript`].
//!
//! One statement per line; `#` starts a full-line comment. Declarations
//! are order-sensitive: a name must appear before its first use.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::address::Address;
use crate::contracts::{ContractError, ContractKind};

use super::{ScenarioScript, Step, StepKind, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: undeclared actor `{name}`")]
    UndeclaredActor { line: usize, name: String },
    #[error("line {line}: undeclared contract `{name}`")]
    UndeclaredContract { line: usize, name: String },
    #[error("line {line}: `{function}` expects {expected} arguments, got {got}")]
    ArityMismatch { line: usize, function: String, expected: String, got: usize },
}

/// Words that introduce statements; none may name an actor or binding.
const RESERVED: &[&str] = &["actor", "deploy", "attach", "advance", "as", "expect"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ParamType {
    Str,
    Int,
    Addr,
    Hash,
}

struct Signature {
    kind: ContractKind,
    params: &'static [ParamType],
    /// `Some(t)` accepts any number of extra `t` arguments.
    variadic_tail: Option<ParamType>,
}

fn signature(function: &str) -> Option<Signature> {
    use ContractKind::*;
    use ParamType::*;
    let (kind, params, variadic_tail): (_, &'static [ParamType], _) = match function {
        "setSalesContract" => (Sales, &[Addr, Addr], None),
        "addOrder" => (Sales, &[Str, Str], None),
        "confirmOrder" | "cancelOrder" | "receiveOrder" => (Sales, &[Str], None),
        "orderExists" => (Sales, &[Str], None),
        "createInvoice" => (Sales, &[Str, Str, Int], None),
        "confirmInvoice" => (Sales, &[Str], None),
        "setFinancialAgreementParties" => (Financial, &[Addr, Addr, Addr], None),
        "confirmAgreement" => (Financial, &[], None),
        "initializeContract" => (LetterOfCredit, &[Addr, Addr, Addr, Int], Some(Str)),
        "addDocument" => (LetterOfCredit, &[Hash, Str], None),
        "validateDocument" => (LetterOfCredit, &[Int], None),
        "getNumberOfDocuments" => (LetterOfCredit, &[], None),
        "getDocumentID" => (LetterOfCredit, &[Int], None),
        "IsDocumentValid" => (LetterOfCredit, &[Int], None),
        _ => return None,
    };
    Some(Signature { kind, params, variadic_tail })
}

/// Character-level cursor over one line; columns are 1-based.
struct Cursor {
    line_no: usize,
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(line_no: usize, text: &str) -> Self {
        Cursor { line_no, chars: text.chars().collect(), pos: 0 }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        self.syntax_at(self.column(), message)
    }

    fn syntax_at(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line_no, column, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ') | Some('\t')) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.at_end() {
            Ok(())
        } else {
            Err(self.syntax("unexpected trailing input"))
        }
    }

    fn expect_char(&mut self, want: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.syntax(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.syntax(format!("expected `{want}`, found end of line"))),
        }
    }

    /// `[A-Za-z_][A-Za-z0-9_]*`
    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            Some(c) => return Err(self.syntax(format!("expected a name, found `{c}`"))),
            None => return Err(self.syntax("expected a name, found end of line")),
        }
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    /// A run of non-whitespace characters (file paths, keywords).
    fn bare_token(&mut self) -> Result<String, ParseError> {
        if self.at_end() {
            return Err(self.syntax("expected a token, found end of line"));
        }
        let start = self.pos;
        while matches!(self.peek(), Some(c) if !c.is_whitespace()) {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn keyword(&mut self, want: &str) -> Result<(), ParseError> {
        let column = self.column();
        let got = self.ident()?;
        if got == want {
            Ok(())
        } else {
            Err(self.syntax_at(column, format!("expected `{want}`, found `{got}`")))
        }
    }

    /// Double-quoted string; `\"` and `\\` are the only escapes.
    fn quoted(&mut self) -> Result<String, ParseError> {
        self.expect_char('"')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some(c) => {
                        return Err(self
                            .syntax_at(self.column() - 1, format!("unknown escape `\\{c}`")))
                    }
                    None => return Err(self.syntax("unterminated string")),
                },
                Some(c) => out.push(c),
                None => return Err(self.syntax("unterminated string")),
            }
        }
    }

    fn integer(&mut self) -> Result<u128, ParseError> {
        let column = self.column();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected an integer"));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits
            .parse()
            .map_err(|_| self.syntax_at(column, format!("integer `{digits}` out of range")))
    }
}

/// Names declared so far; parsing is a single forward pass.
struct Scope {
    actors: BTreeSet<String>,
    contracts: BTreeMap<String, ContractKind>,
    vars: BTreeSet<String>,
}

impl Scope {
    fn check_fresh(&self, cur: &Cursor, column: usize, name: &str) -> Result<(), ParseError> {
        if RESERVED.contains(&name) {
            return Err(cur.syntax_at(column, format!("`{name}` is a reserved word")));
        }
        if self.actors.contains(name)
            || self.contracts.contains_key(name)
            || self.vars.contains(name)
        {
            return Err(cur.syntax_at(column, format!("`{name}` is already declared")));
        }
        Ok(())
    }
}

pub fn parse(text: &str) -> Result<ScenarioScript, ParseError> {
    let mut scope =
        Scope { actors: BTreeSet::new(), contracts: BTreeMap::new(), vars: BTreeSet::new() };
    let mut actors: Vec<(String, Address)> = Vec::new();
    let mut steps: Vec<Step> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let stripped = raw.trim();
        if stripped.is_empty() || stripped.starts_with('#') {
            continue;
        }
        let mut cur = Cursor::new(line_no, raw);
        cur.skip_ws();
        let head_column = cur.column();
        let mut head = cur.ident()?;
        // `attach-content` is the one keyword an ident cannot span.
        if head == "attach" && cur.peek() == Some('-') {
            cur.pos += 1;
            cur.keyword("content")?;
            head = "attach-content".to_string();
        }
        match head.as_str() {
            "actor" => {
                cur.skip_ws();
                let name_column = cur.column();
                let name = cur.ident()?;
                scope.check_fresh(&cur, name_column, &name)?;
                cur.skip_ws();
                let addr_column = cur.column();
                let token = cur.bare_token()?;
                let address = Address::from_str(&token)
                    .map_err(|e| cur.syntax_at(addr_column, e.to_string()))?;
                cur.expect_end()?;
                scope.actors.insert(name.clone());
                actors.push((name, address));
            }
            "deploy" => {
                cur.skip_ws();
                let kind_column = cur.column();
                let kind_name = cur.ident()?;
                let contract = ContractKind::parse(&kind_name).ok_or_else(|| {
                    cur.syntax_at(kind_column, format!("unknown contract kind `{kind_name}`"))
                })?;
                cur.skip_ws();
                cur.keyword("as")?;
                cur.skip_ws();
                let binding_column = cur.column();
                let binding = cur.ident()?;
                scope.check_fresh(&cur, binding_column, &binding)?;
                cur.expect_end()?;
                scope.contracts.insert(binding.clone(), contract);
                steps.push(Step { line: line_no, kind: StepKind::Deploy { contract, binding } });
            }
            "attach" | "attach-content" => {
                cur.skip_ws();
                let actor_column = cur.column();
                let actor = cur.ident()?;
                if !scope.actors.contains(&actor) {
                    return Err(ParseError::UndeclaredActor { line: line_no, name: actor });
                }
                cur.skip_ws();
                let payload = if head == "attach-content" || cur.peek() == Some('"') {
                    cur.quoted()?
                } else {
                    let token = cur.bare_token()?;
                    if token == "as" {
                        return Err(cur
                            .syntax_at(actor_column, "missing file path before `as`".to_string()));
                    }
                    token
                };
                cur.skip_ws();
                cur.keyword("as")?;
                cur.skip_ws();
                let binding_column = cur.column();
                let binding = cur.ident()?;
                scope.check_fresh(&cur, binding_column, &binding)?;
                cur.expect_end()?;
                scope.vars.insert(binding.clone());
                let kind = if head == "attach-content" {
                    StepKind::AttachContent { actor, content: payload, binding }
                } else {
                    StepKind::AttachFile { actor, path: payload, binding }
                };
                steps.push(Step { line: line_no, kind });
            }
            "advance" => {
                cur.skip_ws();
                let column = cur.column();
                let n = cur.integer()?;
                let seconds = u64::try_from(n)
                    .map_err(|_| cur.syntax_at(column, "seconds out of range".to_string()))?;
                cur.expect_end()?;
                steps.push(Step { line: line_no, kind: StepKind::Advance { seconds } });
            }
            _ => {
                let kind = parse_call(&mut cur, head, head_column, &scope)?;
                steps.push(Step { line: line_no, kind });
            }
        }
    }
    Ok(ScenarioScript { actors, steps })
}

/// `<actor> > <contract>.<function>(<args>) [expect-revert <Error>]`
fn parse_call(
    cur: &mut Cursor,
    actor: String,
    actor_column: usize,
    scope: &Scope,
) -> Result<StepKind, ParseError> {
    if !scope.actors.contains(&actor) {
        if RESERVED.contains(&actor.as_str()) {
            return Err(cur.syntax_at(actor_column, format!("`{actor}` is a reserved word")));
        }
        return Err(ParseError::UndeclaredActor { line: cur.line_no, name: actor });
    }
    cur.skip_ws();
    cur.expect_char('>')?;
    cur.skip_ws();
    let contract = cur.ident()?;
    let kind = *scope
        .contracts
        .get(&contract)
        .ok_or(ParseError::UndeclaredContract { line: cur.line_no, name: contract.clone() })?;
    cur.expect_char('.')?;
    let function_column = cur.column();
    let function = cur.ident()?;
    let sig = signature(&function)
        .ok_or_else(|| cur.syntax_at(function_column, format!("unknown function `{function}`")))?;
    if sig.kind != kind {
        return Err(cur.syntax_at(
            function_column,
            format!("`{function}` is not a {kind} function"),
        ));
    }
    cur.expect_char('(')?;
    let mut args: Vec<(usize, Value)> = Vec::new();
    cur.skip_ws();
    if cur.peek() == Some(')') {
        cur.pos += 1;
    } else {
        loop {
            cur.skip_ws();
            let column = cur.column();
            let value = match cur.peek() {
                Some('"') => Value::Str(cur.quoted()?),
                Some('$') => {
                    cur.pos += 1;
                    Value::Var(cur.ident()?)
                }
                Some(c) if c.is_ascii_digit() => Value::Int(cur.integer()?),
                Some(c) if c.is_ascii_alphabetic() || c == '_' => Value::Ident(cur.ident()?),
                Some(c) => return Err(cur.syntax(format!("expected an argument, found `{c}`"))),
                None => return Err(cur.syntax("unterminated argument list")),
            };
            args.push((column, value));
            cur.skip_ws();
            match cur.bump() {
                Some(',') => continue,
                Some(')') => break,
                Some(c) => {
                    return Err(cur
                        .syntax_at(cur.column() - 1, format!("expected `,` or `)`, found `{c}`")))
                }
                None => return Err(cur.syntax("unterminated argument list")),
            }
        }
    }
    check_args(cur, &function, &sig, &args, scope)?;
    cur.skip_ws();
    let expect_revert = if cur.at_end() {
        None
    } else {
        let column = cur.column();
        let token = cur.bare_token()?;
        if token != "expect-revert" {
            return Err(cur.syntax_at(column, format!("expected `expect-revert`, found `{token}`")));
        }
        cur.skip_ws();
        let name_column = cur.column();
        let name = cur.ident()?;
        if !ContractError::NAMES.contains(&name.as_str()) {
            return Err(cur.syntax_at(name_column, format!("unknown error `{name}`")));
        }
        cur.expect_end()?;
        Some(name)
    };
    Ok(StepKind::Call {
        actor,
        contract,
        function,
        args: args.into_iter().map(|(_, v)| v).collect(),
        expect_revert,
    })
}

fn check_args(
    cur: &Cursor,
    function: &str,
    sig: &Signature,
    args: &[(usize, Value)],
    scope: &Scope,
) -> Result<(), ParseError> {
    let fixed = sig.params.len();
    let arity_ok = match sig.variadic_tail {
        Some(_) => args.len() >= fixed,
        None => args.len() == fixed,
    };
    if !arity_ok {
        let expected = match sig.variadic_tail {
            Some(_) => format!("at least {fixed}"),
            None => fixed.to_string(),
        };
        return Err(ParseError::ArityMismatch {
            line: cur.line_no,
            function: function.to_string(),
            expected,
            got: args.len(),
        });
    }
    for (i, (column, value)) in args.iter().enumerate() {
        let param = if i < fixed {
            sig.params[i]
        } else {
            sig.variadic_tail.expect("arity check admits extras only with a tail")
        };
        let ok = match (param, value) {
            (ParamType::Str, Value::Str(_)) => true,
            (ParamType::Int, Value::Int(_)) => true,
            // Literal addresses are parsed at execution.
            (ParamType::Addr, Value::Str(_)) => true,
            (ParamType::Addr, Value::Ident(name)) => {
                if !scope.actors.contains(name) {
                    return Err(ParseError::UndeclaredActor {
                        line: cur.line_no,
                        name: name.clone(),
                    });
                }
                true
            }
            // Literal hashes are parsed at execution.
            (ParamType::Hash, Value::Str(_)) => true,
            (ParamType::Hash, Value::Var(name)) => {
                if !scope.vars.contains(name) {
                    return Err(cur.syntax_at(
                        *column,
                        format!("undeclared document variable `${name}`"),
                    ));
                }
                true
            }
            _ => false,
        };
        if !ok {
            let want = match param {
                ParamType::Str => "a quoted string",
                ParamType::Int => "an integer",
                ParamType::Addr => "an actor name or a quoted address",
                ParamType::Hash => "a document variable or a quoted hash",
            };
            return Err(cur.syntax_at(
                *column,
                format!("argument {} of `{function}` must be {want}", i + 1),
            ));
        }
    }
    Ok(())
}
