//! Canonical line-oriented text records for the core state types.
//!
//! One record per line, deterministic byte-for-byte: collections are
//! rendered in their canonical order and floating-point coordinates use the
//! shortest decimal form that parses back to the same value, so rendering
//! the same value twice gives identical bytes and `parse(render(x)) == x`.
//!
//! The shapes at a glance (labels are `birth:index`, states are bracketed
//! coordinate lists):
//!
//! ```text
//! set time=3 {(1:1)@[2.5] (1:2)@[9.5,0.5]}
//! set {}
//! segment label=1:1 start=3 states=[2.5] [3.5]
//! trajectory start=3 states=[2.5] [3.5]
//! sot {(start=3 [2.5] [3.5]) (start=7 [9])}
//! lsot {(label=1:1 start=3 [2.5]) (label=2:1 start=7 [9])}
//! ltrajectory label=1:1 start=1 entries=[2.5] * [3.5]
//! ```
//!
//! The `*` in an `ltrajectory` marks a time step where the track has no
//! state (a dropout gap).

use std::fmt::Write as _;

use thiserror::Error;

use crate::state_model::{
    KinematicState, LTrajectory, Label, LabeledSet, LabeledState, StateModelError, TrackSegment,
};
use crate::trajectory_repr::{LabeledSoT, SoT, Trajectory, TrajectoryError};

#[derive(Debug, Error, PartialEq)]
pub enum RecordError {
    #[error("expected {what} at byte {at}")]
    Expected { what: &'static str, at: usize },
    #[error("bad number at byte {at}")]
    BadNumber { at: usize },
    #[error("unexpected trailing input at byte {at}")]
    TrailingInput { at: usize },
    #[error(transparent)]
    MalformedState(#[from] StateModelError),
    #[error(transparent)]
    MalformedTrajectory(#[from] TrajectoryError),
}

// ============================================================================
// Rendering
// ============================================================================

fn push_state(out: &mut String, state: &KinematicState) {
    out.push('[');
    for (i, c) in state.coords().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{c}").expect("writing to a String cannot fail");
    }
    out.push(']');
}

fn push_states(out: &mut String, states: &[KinematicState]) {
    for (i, s) in states.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        push_state(out, s);
    }
}

/// `set time=3 {(1:1)@[2.5] ...}`, or `set {}` when empty (an empty set
/// carries no time index).
pub fn render_labeled_set(set: &LabeledSet<KinematicState>) -> String {
    let mut out = String::from("set ");
    if let Some(time) = set.time() {
        write!(out, "time={time} ").expect("writing to a String cannot fail");
    }
    out.push('{');
    for (i, e) in set.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "({})@", e.label).expect("writing to a String cannot fail");
        push_state(&mut out, &e.x);
    }
    out.push('}');
    out
}

/// `segment label=1:1 start=3 states=[2.5] [3.5]`
pub fn render_segment(segment: &TrackSegment<KinematicState>) -> String {
    let mut out = String::new();
    write!(out, "segment label={} start={} states=", segment.label(), segment.start_time())
        .expect("writing to a String cannot fail");
    push_states(&mut out, segment.states());
    out
}

/// `trajectory start=3 states=[2.5] [3.5]`
pub fn render_trajectory(trajectory: &Trajectory<KinematicState>) -> String {
    let mut out = String::new();
    write!(out, "trajectory start={} states=", trajectory.start_time())
        .expect("writing to a String cannot fail");
    push_states(&mut out, trajectory.states());
    out
}

/// `sot {(start=3 [2.5] [3.5]) (start=7 [9])}`
pub fn render_sot(sot: &SoT<KinematicState>) -> String {
    let mut out = String::from("sot {");
    for (i, t) in sot.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "(start={} ", t.start_time()).expect("writing to a String cannot fail");
        push_states(&mut out, t.states());
        out.push(')');
    }
    out.push('}');
    out
}

/// `lsot {(label=1:1 start=3 [2.5]) ...}`
pub fn render_labeled_sot(sot: &LabeledSoT<KinematicState>) -> String {
    let mut out = String::from("lsot {");
    for (i, s) in sot.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "(label={} start={} ", s.label(), s.start_time())
            .expect("writing to a String cannot fail");
        push_states(&mut out, s.states());
        out.push(')');
    }
    out.push('}');
    out
}

/// `ltrajectory label=1:1 start=1 entries=[2.5] * [3.5]`
pub fn render_ltrajectory(trajectory: &LTrajectory<KinematicState>) -> String {
    let mut out = String::new();
    write!(out, "ltrajectory label={} start={} entries=", trajectory.label(), trajectory.start_time())
        .expect("writing to a String cannot fail");
    for (i, entry) in trajectory.entries().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        match entry {
            Some(s) => push_state(&mut out, s),
            None => out.push('*'),
        }
    }
    out
}

// ============================================================================
// Parsing
// ============================================================================

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(' ') {
            self.pos += 1;
        }
    }

    fn eat(&mut self, token: &'static str) -> Result<(), RecordError> {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(RecordError::Expected { what: token, at: self.pos })
        }
    }

    fn tries(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn u32(&mut self) -> Result<u32, RecordError> {
        let digits: usize = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(RecordError::Expected { what: "integer", at: self.pos });
        }
        let value = self.rest()[..digits]
            .parse()
            .map_err(|_| RecordError::BadNumber { at: self.pos })?;
        self.pos += digits;
        Ok(value)
    }

    fn f64(&mut self) -> Result<f64, RecordError> {
        let len = self
            .rest()
            .bytes()
            .take_while(|b| b.is_ascii_digit() || matches!(b, b'-' | b'+' | b'.' | b'e' | b'E'))
            .count();
        if len == 0 {
            return Err(RecordError::Expected { what: "number", at: self.pos });
        }
        let value = self.rest()[..len]
            .parse()
            .map_err(|_| RecordError::BadNumber { at: self.pos })?;
        self.pos += len;
        Ok(value)
    }

    fn label(&mut self) -> Result<Label, RecordError> {
        let birth = self.u32()?;
        self.eat(":")?;
        let index = self.u32()?;
        if index == 0 {
            return Err(RecordError::BadNumber { at: self.pos });
        }
        Ok(Label::new(birth, index))
    }

    fn state(&mut self) -> Result<KinematicState, RecordError> {
        self.eat("[")?;
        let mut coords = vec![self.f64()?];
        while self.tries(",") {
            coords.push(self.f64()?);
        }
        self.eat("]")?;
        Ok(KinematicState::new(coords)?)
    }

    /// One or more space-separated states.
    fn states(&mut self) -> Result<Vec<KinematicState>, RecordError> {
        let mut states = vec![self.state()?];
        loop {
            let mark = self.pos;
            self.skip_ws();
            if self.peek() == Some('[') {
                states.push(self.state()?);
            } else {
                self.pos = mark;
                break;
            }
        }
        Ok(states)
    }

    fn finish(&mut self) -> Result<(), RecordError> {
        self.skip_ws();
        if self.pos != self.text.len() {
            return Err(RecordError::TrailingInput { at: self.pos });
        }
        Ok(())
    }
}

/// Parses the output of [`render_labeled_set`].
pub fn parse_labeled_set(text: &str) -> Result<LabeledSet<KinematicState>, RecordError> {
    let mut c = Cursor::new(text);
    c.eat("set ")?;
    if c.tries("{}") {
        c.finish()?;
        return Ok(LabeledSet::empty());
    }
    c.eat("time=")?;
    let time = c.u32()?;
    c.skip_ws();
    c.eat("{")?;
    let mut elems = Vec::new();
    loop {
        c.skip_ws();
        if c.tries("}") {
            break;
        }
        c.eat("(")?;
        let label = c.label()?;
        c.eat(")@")?;
        let x = c.state()?;
        elems.push(LabeledState::new(x, label, time));
    }
    c.finish()?;
    if elems.is_empty() {
        return Err(RecordError::Expected { what: "element in a timed set", at: text.len() });
    }
    Ok(LabeledSet::new(elems)?)
}

/// Parses the output of [`render_segment`].
pub fn parse_segment(text: &str) -> Result<TrackSegment<KinematicState>, RecordError> {
    let mut c = Cursor::new(text);
    c.eat("segment label=")?;
    let label = c.label()?;
    c.eat(" start=")?;
    let start = c.u32()?;
    c.eat(" states=")?;
    let states = c.states()?;
    c.finish()?;
    Ok(TrackSegment::new(label, start, states)?)
}

/// Parses the output of [`render_trajectory`].
pub fn parse_trajectory(text: &str) -> Result<Trajectory<KinematicState>, RecordError> {
    let mut c = Cursor::new(text);
    c.eat("trajectory start=")?;
    let start = c.u32()?;
    c.eat(" states=")?;
    let states = c.states()?;
    c.finish()?;
    Ok(Trajectory::new(start, states)?)
}

/// Parses the output of [`render_sot`].
pub fn parse_sot(text: &str) -> Result<SoT<KinematicState>, RecordError> {
    let mut c = Cursor::new(text);
    c.eat("sot {")?;
    let mut trajectories = Vec::new();
    loop {
        c.skip_ws();
        if c.tries("}") {
            break;
        }
        c.eat("(start=")?;
        let start = c.u32()?;
        c.skip_ws();
        let states = c.states()?;
        c.eat(")")?;
        trajectories.push(Trajectory::new(start, states)?);
    }
    c.finish()?;
    Ok(SoT::new(trajectories))
}

/// Parses the output of [`render_labeled_sot`].
pub fn parse_labeled_sot(text: &str) -> Result<LabeledSoT<KinematicState>, RecordError> {
    let mut c = Cursor::new(text);
    c.eat("lsot {")?;
    let mut segments = Vec::new();
    loop {
        c.skip_ws();
        if c.tries("}") {
            break;
        }
        c.eat("(label=")?;
        let label = c.label()?;
        c.eat(" start=")?;
        let start = c.u32()?;
        c.skip_ws();
        let states = c.states()?;
        c.eat(")")?;
        segments.push(TrackSegment::new(label, start, states)?);
    }
    c.finish()?;
    Ok(LabeledSoT::new(segments)?)
}

/// Parses the output of [`render_ltrajectory`].
pub fn parse_ltrajectory(text: &str) -> Result<LTrajectory<KinematicState>, RecordError> {
    let mut c = Cursor::new(text);
    c.eat("ltrajectory label=")?;
    let label = c.label()?;
    c.eat(" start=")?;
    let start = c.u32()?;
    c.eat(" entries=")?;
    let mut entries = Vec::new();
    loop {
        c.skip_ws();
        match c.peek() {
            Some('*') => {
                c.eat("*")?;
                entries.push(None);
            }
            Some('[') => entries.push(Some(c.state()?)),
            _ => break,
        }
    }
    c.finish()?;
    if entries.is_empty() {
        return Err(RecordError::Expected { what: "entry", at: text.len() });
    }
    Ok(LTrajectory::new(label, start, entries))
}

// ============================================================================
// Tests
// ============================================================================
