//! Player II at the keyboard.

use std::io::{BufRead, Write};

use opengame_core::game::{check_pick, GameError, PointPolicy, Position};
use opengame_core::{GameVariant, PointSet};

pub struct InteractivePicker<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    variant: GameVariant,
    failure: Option<String>,
}

impl<'a> InteractivePicker<'a> {
    pub fn new(input: &'a mut dyn BufRead, out: &'a mut dyn Write, variant: GameVariant) -> Self {
        InteractivePicker { input, out, variant, failure: None }
    }

    /// The I/O failure behind the last error, if any.
    pub fn take_failure(&mut self) -> Option<String> {
        self.failure.take()
    }

    fn fail(&mut self, msg: String) -> GameError {
        self.failure = Some(msg.clone());
        GameError::InvariantViolation(msg)
    }

    fn parse(&self, pos: &Position<'_>, line: &str) -> Result<PointSet, String> {
        let mut set = PointSet::EMPTY;
        for label in line.split(',').map(str::trim).filter(|l| !l.is_empty()) {
            let p = pos.space.point_by_label(label).ok_or_else(|| format!("no point named {label:?}"))?;
            set |= PointSet::singleton(p);
        }
        Ok(set)
    }
}

fn show(pos: &Position<'_>, set: PointSet) -> String {
    format!("{{{}}}", pos.space.set_labels(set).join(", "))
}

impl PointPolicy for InteractivePicker<'_> {
    fn pick(&mut self, pos: &Position<'_>, open: PointSet) -> Result<PointSet, GameError> {
        let io = |e: std::io::Error| e.to_string();
        let header = format!("stage {}: closure {}; Player I offers {}", pos.stage(), show(pos, pos.closure), show(pos, open));
        writeln!(self.out, "{header}").map_err(|e| self.fail(io(e)))?;
        let prompt = if self.variant == GameVariant::MultiPoint { "pick points (comma-separated)> " } else { "pick a point> " };
        loop {
            write!(self.out, "{prompt}").and_then(|_| self.out.flush()).map_err(|e| self.fail(io(e)))?;
            let mut line = String::new();
            let read = self.input.read_line(&mut line).map_err(|e| self.fail(io(e)))?;
            if read == 0 {
                return Err(self.fail("input ended before the picks became dense".to_string()));
            }
            let picked = match self.parse(pos, &line) {
                Ok(p) => p,
                Err(msg) => {
                    writeln!(self.out, "rejected: {msg}").map_err(|e| self.fail(io(e)))?;
                    continue;
                }
            };
            if let Err(e) = check_pick(self.variant, pos.closure, open, picked) {
                let msg = if picked.is_empty() {
                    "enter a point label".to_string()
                } else if !picked.is_subset(open) {
                    format!("{} is not inside the offered open {}", show(pos, picked - open), show(pos, open))
                } else if picked.len() > 1 {
                    "pick exactly one point".to_string()
                } else {
                    e.to_string()
                };
                writeln!(self.out, "rejected: {msg}").map_err(|e| self.fail(io(e)))?;
                continue;
            }
            let closure = pos.space.closure(pos.closure | picked);
            writeln!(self.out, "closure now {}", show(pos, closure)).map_err(|e| self.fail(io(e)))?;
            return Ok(picked);
        }
    }
}
