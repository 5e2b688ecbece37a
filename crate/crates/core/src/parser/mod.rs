//! Screenplay text format: parsing, canonical formatting and validation.
//!
//! ```text
//! screenplay := role+
//! role       := "role" IDENT "{" step+ "}"
//! step       := action | repeat | until
//! action     := atom+ "for" DURATION
//! atom       := "move" MOVE | "led" INT INT INT | "send" BYTE+
//! MOVE       := "stop" | "straight" | "left" | "right"
//! repeat     := "repeat" INT "{" step+ "}"
//! until      := "until" event "{" step+ "}"
//! event      := "message" ("first" BYTE)? | "silence" DURATION
//! DURATION   := INT ("ms" | "s")
//! BYTE       := "0x" HEXDIGIT HEXDIGIT
//! ```
//!
//! `#` starts a comment running to the end of the line. A `;` may separate
//! steps and is otherwise ignored.

mod diagnostic;
mod format;
mod lexer;
mod validate;

pub use diagnostic::{codes, has_errors, Diagnostic, Pos, Severity};
pub use format::format_screenplay;
pub use validate::validate;

use lexer::{tokenize, Tok, Token};

use crate::model::{
    Action, ActionProgram, ColorState, Event, MessagePayload, MotorCommand, Screenplay, Step, MAX_DEPTH,
    MAX_PAYLOAD,
};

pub const KEYWORDS: &[&str] = &[
    "role", "for", "move", "led", "send", "repeat", "until", "message", "first", "silence", "stop", "straight",
    "left", "right",
];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

/// Parses a screenplay. On failure returns every diagnostic found, at least
/// one of them an error.
pub fn parse_screenplay(source: &str) -> Result<Screenplay, Vec<Diagnostic>> {
    match parse_with_diagnostics(source) {
        (Some(sp), _) => Ok(sp),
        (None, diags) => Err(diags),
    }
}

/// Parses a screenplay, also returning warnings when it succeeds.
pub fn parse_with_diagnostics(source: &str) -> (Option<Screenplay>, Vec<Diagnostic>) {
    let tokens = match tokenize(source) {
        Ok(t) => t,
        Err(d) => return (None, vec![d]),
    };
    let mut p = Parser { tokens, at: 0, diags: Vec::new(), untils: Vec::new() };
    let result = p.screenplay();
    let mut diags = p.diags;
    match result {
        Ok(sp) if !has_errors(&diags) => {
            let sent = validate::first_bytes_sent(&sp);
            for u in &p.untils {
                if u.followed && !validate::can_fire(&u.event, &sent) {
                    diags.push(validate::unreachable_warning(u.pos, &u.event));
                }
            }
            (Some(sp), diags)
        }
        _ => {
            debug_assert!(has_errors(&diags));
            (None, diags)
        }
    }
}

/// Raised once a diagnostic that stops parsing has been recorded.
struct Fatal;

type PResult<T> = Result<T, Fatal>;

struct UntilSite {
    pos: Pos,
    event: Event,
    followed: bool,
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    diags: Vec<Diagnostic>,
    untils: Vec<UntilSite>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&mut self, d: Diagnostic) -> PResult<T> {
        self.diags.push(d);
        Err(Fatal)
    }

    fn unexpected<T>(&mut self, tok: &Token, wanted: &str) -> PResult<T> {
        let code = if tok.tok == Tok::Eof { codes::UNEXPECTED_EOF } else { codes::UNEXPECTED };
        self.fail(Diagnostic::error(tok.pos, code, format!("expected {wanted}, found {}", tok.tok.describe())))
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == word)
    }

    fn expect(&mut self, want: Tok) -> PResult<Token> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            self.unexpected(&t, &want.describe())
        }
    }

    fn skip_semis(&mut self) {
        while self.peek().tok == Tok::Semi {
            self.next();
        }
    }

    fn screenplay(&mut self) -> PResult<Screenplay> {
        let mut sp = Screenplay::default();
        if self.peek().tok == Tok::Eof {
            return self.fail(Diagnostic::error(Pos::START, codes::NO_ROLES, "no roles defined"));
        }
        while self.peek().tok != Tok::Eof {
            let (pos, program) = self.role()?;
            if sp.programs.contains_key(&program.role) {
                self.diags.push(Diagnostic::error(
                    pos,
                    codes::DUPLICATE_ROLE,
                    format!("role '{}' is defined more than once", program.role),
                ));
            } else {
                sp.insert(program);
            }
        }
        Ok(sp)
    }

    fn role(&mut self) -> PResult<(Pos, ActionProgram)> {
        let kw = self.next();
        match &kw.tok {
            Tok::Ident(s) if s == "role" => {}
            Tok::Ident(s) => {
                let msg = format!("unknown keyword '{s}', expected 'role'");
                return self.fail(Diagnostic::error(kw.pos, codes::UNKNOWN_KEYWORD, msg));
            }
            _ => return self.unexpected(&kw, "'role'"),
        }
        let name = self.next();
        let role = match &name.tok {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                let msg = format!("'{s}' is a reserved word and cannot name a role");
                self.diags.push(Diagnostic::error(name.pos, codes::RESERVED_NAME, msg));
                s.clone()
            }
            Tok::Ident(s) => s.clone(),
            _ => return self.unexpected(&name, "role name"),
        };
        let steps = self.block(0)?;
        Ok((name.pos, ActionProgram::new(role, steps)))
    }

    /// `"{" step+ "}"`; `depth` counts the blocks enclosing this one.
    fn block(&mut self, depth: usize) -> PResult<Vec<Step>> {
        let open = self.expect(Tok::LBrace)?;
        let mut steps = Vec::new();
        let mut prev_until: Option<usize> = None;
        loop {
            self.skip_semis();
            if self.peek().tok == Tok::RBrace {
                break;
            }
            if let Some(i) = prev_until.take() {
                self.untils[i].followed = true;
            }
            let site = self.untils.len();
            let is_until = self.is_word("until");
            steps.push(self.step(depth)?);
            if is_until {
                prev_until = Some(site);
            }
        }
        self.next();
        if steps.is_empty() {
            self.diags.push(Diagnostic::error(open.pos, codes::EMPTY_BLOCK, "block must contain at least one step"));
        }
        Ok(steps)
    }

    fn step(&mut self, depth: usize) -> PResult<Step> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(s) if s == "repeat" => self.repeat(depth),
            Tok::Ident(s) if s == "until" => self.until(depth),
            Tok::Ident(s) if matches!(s.as_str(), "move" | "led" | "send") => self.action(),
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let msg = format!("unknown keyword '{s}'");
                self.fail(Diagnostic::error(t.pos, codes::UNKNOWN_KEYWORD, msg))
            }
            _ => {
                self.next();
                self.unexpected(&t, "a step ('move', 'led', 'send', 'repeat' or 'until')")
            }
        }
    }

    fn enter_block(&mut self, kw: &Token, depth: usize) -> PResult<()> {
        if depth + 1 > MAX_DEPTH {
            let msg = format!("nesting depth {} exceeds the limit of {MAX_DEPTH}", depth + 1);
            return self.fail(Diagnostic::error(kw.pos, codes::DEPTH, msg));
        }
        Ok(())
    }

    fn repeat(&mut self, depth: usize) -> PResult<Step> {
        let kw = self.next();
        self.enter_block(&kw, depth)?;
        let n = self.next();
        let count = match n.tok {
            Tok::Int(Some(0)) => {
                self.diags.push(Diagnostic::error(n.pos, codes::REPEAT_ZERO, "repeat count must be ≥ 1"));
                1
            }
            Tok::Int(Some(c)) => c,
            Tok::Int(None) => {
                self.diags.push(Diagnostic::error(n.pos, codes::INT_RANGE, "repeat count does not fit in 32 bits"));
                1
            }
            _ => return self.unexpected(&n, "repeat count"),
        };
        let body = self.block(depth + 1)?;
        Ok(Step::Repeat { count, body })
    }

    fn until(&mut self, depth: usize) -> PResult<Step> {
        let kw = self.next();
        self.enter_block(&kw, depth)?;
        let ev = self.next();
        let event = match &ev.tok {
            Tok::Ident(s) if s == "message" => {
                if self.is_word("first") {
                    self.next();
                    let b = self.next();
                    match b.tok {
                        Tok::Byte(v) => Event::MessageHeard { filter: Some(v) },
                        _ => return self.unexpected(&b, "byte literal after 'first'"),
                    }
                } else {
                    Event::MessageHeard { filter: None }
                }
            }
            Tok::Ident(s) if s == "silence" => {
                let d = self.next();
                let window_ms = self.duration_value(&d)?;
                Event::Silence { window_ms }
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let msg = format!("unknown event '{s}' (expected 'message' or 'silence')");
                return self.fail(Diagnostic::error(ev.pos, codes::UNKNOWN_KEYWORD, msg));
            }
            _ => return self.unexpected(&ev, "'message' or 'silence'"),
        };
        self.untils.push(UntilSite { pos: kw.pos, event, followed: false });
        let body = self.block(depth + 1)?;
        Ok(Step::Until { event, body })
    }

    fn duration_value(&mut self, t: &Token) -> PResult<u32> {
        match t.tok {
            Tok::Duration(Some(0)) => {
                self.diags.push(Diagnostic::error(t.pos, codes::BAD_DURATION, "duration must be at least 1ms"));
                Ok(1)
            }
            Tok::Duration(Some(v)) => Ok(v),
            Tok::Duration(None) => {
                self.diags.push(Diagnostic::error(t.pos, codes::INT_RANGE, "duration does not fit in 32-bit milliseconds"));
                Ok(1)
            }
            Tok::Int(_) => {
                self.fail(Diagnostic::error(t.pos, codes::BAD_DURATION, "duration needs a unit ('ms' or 's')"))
            }
            _ => self.unexpected(t, "duration"),
        }
    }

    fn action(&mut self) -> PResult<Step> {
        let mut motor: Option<MotorCommand> = None;
        let mut led: Option<ColorState> = None;
        let mut tx: Option<MessagePayload> = None;
        let mut seen = [false; 3];
        loop {
            let t = self.next();
            let word = match &t.tok {
                Tok::Ident(s) => s.clone(),
                _ => return self.unexpected(&t, "'move', 'led', 'send' or 'for'"),
            };
            let slot = match word.as_str() {
                "move" => 0,
                "led" => 1,
                "send" => 2,
                "for" if seen.iter().any(|s| *s) => break,
                _ if KEYWORDS.contains(&word.as_str()) => {
                    return self.unexpected(&t, "'move', 'led', 'send' or 'for'");
                }
                _ => {
                    let msg = format!("unknown keyword '{word}'");
                    return self.fail(Diagnostic::error(t.pos, codes::UNKNOWN_KEYWORD, msg));
                }
            };
            if seen[slot] {
                let msg = format!("'{word}' given more than once in one action");
                self.diags.push(Diagnostic::error(t.pos, codes::DUPLICATE_ATOM, msg));
            }
            seen[slot] = true;
            match slot {
                0 => {
                    let m = self.next();
                    motor = match &m.tok {
                        Tok::Ident(s) => match MotorCommand::from_keyword(s) {
                            Some(c) => Some(c),
                            None => {
                                let msg = format!("unknown motion '{s}' (expected stop, straight, left or right)");
                                return self.fail(Diagnostic::error(m.pos, codes::UNKNOWN_MOTION, msg));
                            }
                        },
                        _ => return self.unexpected(&m, "motion"),
                    };
                }
                1 => {
                    let mut ch = [0u8; 3];
                    for c in &mut ch {
                        let v = self.next();
                        *c = match v.tok {
                            Tok::Int(Some(x)) if x <= 3 => x as u8,
                            Tok::Int(_) => {
                                let msg = "led channel must be 0, 1, 2 or 3".to_string();
                                self.diags.push(Diagnostic::error(v.pos, codes::LED_RANGE, msg));
                                0
                            }
                            _ => return self.unexpected(&v, "led channel value"),
                        };
                    }
                    led = Some(ColorState::new(ch[0], ch[1], ch[2]).expect("channels checked"));
                }
                _ => {
                    let mut bytes = Vec::new();
                    let mut first_extra = None;
                    while let Tok::Byte(b) = self.peek().tok {
                        let at = self.next().pos;
                        if bytes.len() == MAX_PAYLOAD && first_extra.is_none() {
                            first_extra = Some(at);
                        }
                        bytes.push(b);
                    }
                    if bytes.is_empty() {
                        let t = self.next();
                        return self.unexpected(&t, "byte literal after 'send'");
                    }
                    if let Some(at) = first_extra {
                        let msg = format!("payload of {} bytes exceeds the {MAX_PAYLOAD}-byte frame", bytes.len());
                        self.diags.push(Diagnostic::error(at, codes::PAYLOAD_TOO_LONG, msg));
                        bytes.truncate(MAX_PAYLOAD);
                    }
                    tx = Some(MessagePayload::new(bytes).expect("length checked"));
                }
            }
        }
        let d = self.next();
        let duration_ms = self.duration_value(&d)?;
        let action = Action::new(motor.unwrap_or_default(), led.unwrap_or_default(), tx, duration_ms)
            .expect("duration checked");
        Ok(Step::Act(action))
    }
}
