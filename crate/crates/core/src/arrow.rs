use core::fmt;

use serde::{Deserialize, Serialize};

/// A single arrow in a stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arrow {
    Left,
    Right,
}

impl Arrow {
    pub fn flip(self) -> Arrow {
        match self {
            Arrow::Left => Arrow::Right,
            Arrow::Right => Arrow::Left,
        }
    }

    /// Displacement of the step taken when this arrow is consumed.
    pub fn step(self) -> i64 {
        match self {
            Arrow::Left => -1,
            Arrow::Right => 1,
        }
    }

    pub fn is_right(self) -> bool {
        self == Arrow::Right
    }

    pub fn is_left(self) -> bool {
        self == Arrow::Left
    }

    /// Parses the single-letter form used in stack strings (`'L'` / `'R'`).
    pub fn from_char(c: char) -> Option<Arrow> {
        match c {
            'L' | 'l' => Some(Arrow::Left),
            'R' | 'r' => Some(Arrow::Right),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Arrow::Left => 'L',
            Arrow::Right => 'R',
        }
    }
}

impl fmt::Display for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arrow::Left => "←",
            Arrow::Right => "→",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_is_involution() {
        for a in [Arrow::Left, Arrow::Right] {
            assert_ne!(a.flip(), a);
            assert_eq!(a.flip().flip(), a);
        }
    }

    #[test]
    fn char_round_trip() {
        for a in [Arrow::Left, Arrow::Right] {
            assert_eq!(Arrow::from_char(a.as_char()), Some(a));
        }
        assert_eq!(Arrow::from_char('x'), None);
    }
}
