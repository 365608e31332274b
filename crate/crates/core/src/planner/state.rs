/// Grid cell. `x` grows East, `y` grows South.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: i16,
    pub y: i16,
}

impl Cell {
    pub fn new(x: i16, y: i16) -> Self {
        Cell { x, y }
    }

    pub fn step(self, dir: Direction) -> Cell {
        let (dx, dy) = dir.delta();
        Cell {
            x: self.x + dx,
            y: self.y + dy,
        }
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x) as u32 + self.y.abs_diff(other.y) as u32
    }

    pub fn adjacent(self, other: Cell) -> bool {
        self.manhattan(other) == 1
    }
}

/// Cardinal move directions, ordered alphabetically for deterministic
/// successor enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    East,
    North,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::North,
        Direction::South,
        Direction::West,
    ];

    pub fn delta(self) -> (i16, i16) {
        match self {
            Direction::East => (1, 0),
            Direction::North => (0, -1),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Direction::East => 'E',
            Direction::North => 'N',
            Direction::South => 'S',
            Direction::West => 'W',
        }
    }

    pub fn from_letter(c: char) -> Option<Direction> {
        match c.to_ascii_uppercase() {
            'E' => Some(Direction::East),
            'N' => Some(Direction::North),
            'S' => Some(Direction::South),
            'W' => Some(Direction::West),
            _ => None,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Direction::East => "east",
            Direction::North => "north",
            Direction::South => "south",
            Direction::West => "west",
        };
        f.write_str(name)
    }
}

/// The agent's atomic actions. Indices point into the owning [`super::World`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    Move(Direction),
    Pickup(u8),
    Unlock { door: u8, key: u8 },
    Take(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAction {
    pub kind: ActionKind,
    pub cost: u32,
}

/// Dynamic world state: agent cell plus bitmasks over keys and door locks.
///
/// A key index is set in `inventory` xor `key_on_map`, or in neither once
/// consumed by an unlock. `taken`, once set, never clears: the state is
/// absorbing and has no successors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldState {
    pub agent: Cell,
    pub inventory: u32,
    pub key_on_map: u32,
    pub locked: u32,
    pub taken: Option<u8>,
    /// Interned ids of extra ground atoms set by non-standard effects.
    pub overlay: Vec<u32>,
}

impl WorldState {
    pub fn holds_key(&self, key: u8) -> bool {
        self.inventory & (1 << key) != 0
    }

    pub fn key_available(&self, key: u8) -> bool {
        self.key_on_map & (1 << key) != 0
    }

    pub fn is_locked(&self, door: u8) -> bool {
        self.locked & (1 << door) != 0
    }

    pub fn held_keys(&self) -> impl Iterator<Item = u8> + '_ {
        (0..32).filter(|k| self.holds_key(*k))
    }

    pub fn keys_on_map(&self) -> impl Iterator<Item = u8> + '_ {
        (0..32).filter(|k| self.key_available(*k))
    }

    pub fn overlay_holds(&self, atom: u32) -> bool {
        self.overlay.binary_search(&atom).is_ok()
    }

    pub fn overlay_set(&mut self, atom: u32, value: bool) {
        match self.overlay.binary_search(&atom) {
            Ok(i) if !value => {
                self.overlay.remove(i);
            }
            Err(i) if value => {
                self.overlay.insert(i, atom);
            }
            _ => {}
        }
    }
}
