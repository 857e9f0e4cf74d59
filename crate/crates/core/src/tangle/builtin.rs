//! Built-in diagrams for the supported links, as cut braid closures.

use super::diagram::{CrossingSign, Event, Orientation, TangleDiagram};
use crate::error::{Error, Result};
use crate::links::LinkId;

/// Braid word (`±g` is `σ_g^{±1}`) and strand count of each built-in link.
pub fn braid_word(link: LinkId) -> (&'static [i32], usize) {
    match link {
        LinkId::K4_1 => (&[1, -2, 1, -2], 3),
        LinkId::K5_2 => (&[-1, -1, -1, -2, 1, -2], 3),
        LinkId::K6_1 => (&[1, 1, 2, -1, -3, 2, -3], 4),
        LinkId::K6_3 => (&[1, 1, -2, 1, -2, -2], 3),
        LinkId::K8_9 => (&[1, 1, 1, -2, 1, -2, -2, -2], 3),
        LinkId::K8_20 => (&[1, 1, 1, -2, -1, -1, -1, -2], 3),
        LinkId::Whitehead => (&[1, -2, 1, -2, -2], 3),
    }
}

/// Closure of a braid on `strands` strands, cut open along strand 1.
///
/// Strands `2..=n` are closed to the right: each is born in a leftward cup
/// at the start and dies in a rightward cap at the end, so the cut strand
/// stays at position 0 throughout.
pub fn braid_closure(word: &[i32], strands: usize) -> Result<TangleDiagram> {
    if strands == 0 {
        return Err(Error::InvalidArgument("a braid needs at least one strand".into()));
    }
    let mut events = Vec::with_capacity(word.len() + 2 * strands);
    for k in 1..strands {
        events.push(Event::Cup {
            pos: k,
            left: Orientation::Up,
        });
    }
    for &g in word {
        let gen = g.unsigned_abs() as usize;
        if g == 0 || gen >= strands {
            return Err(Error::InvalidArgument(format!(
                "braid generator {g} invalid on {strands} strands"
            )));
        }
        let sign = if g > 0 {
            CrossingSign::Positive
        } else {
            CrossingSign::Negative
        };
        events.push(Event::Crossing { sign, pos: gen - 1 });
    }
    for k in (1..strands).rev() {
        events.push(Event::Cap {
            pos: k,
            left: Some(Orientation::Up),
        });
    }
    let d = TangleDiagram::new(events);
    d.validate()?;
    Ok(d)
}

/// Built-in (1,1)-tangle diagram of `link`.
pub fn builtin_diagram(link: LinkId) -> TangleDiagram {
    let (word, strands) = braid_word(link);
    braid_closure(word, strands).expect("built-in braid words are valid")
}
