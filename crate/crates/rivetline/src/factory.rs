//! The plant itself: a deterministic state machine over nine cells.
//!
//! Products ride carriages along a conveyor chain
//! `Entry -> Belt1 -> Table -> Belt2 -> Assembly -> Belt3 -> Exit`
//! with a side branch `Table -> Belt4 -> Storage`. The rotary table joins
//! the branches: transfers on or off the table only succeed when the table
//! faces the belt in question. Blue products with two rivets belong at the
//! exit, green products with two rivets belong in storage; everything else
//! delivered anywhere is an incorrect sort.
//!
//! Every call to [`FactoryState::apply`] advances the step counter, mutates
//! the plant according to one actuator command and returns the events that
//! happened. Randomness enters only through the seeded color stream consumed
//! at dispatch, so replaying an action list from an equal seed reproduces
//! the event log exactly.

use crate::rng::Splitmix64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Product color, assigned once at dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Green,
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Blue => write!(f, "Blue"),
            Color::Green => write!(f, "Green"),
        }
    }
}

impl std::str::FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "blue" => Ok(Color::Blue),
            "green" => Ok(Color::Green),
            other => Err(format!("unknown color `{other}` (expected blue or green)")),
        }
    }
}

/// A product riding its carriage; the two are modeled as one unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Product {
    pub color: Color,
    /// Installed rivets, 0..=2. Never decreases.
    pub rivets: u8,
}

/// Plant cells. `Exit` and `Storage` are sinks: a product moved there is
/// delivered and leaves the occupancy map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cell {
    Entry,
    Belt1,
    Table,
    Belt2,
    Assembly,
    Belt3,
    Exit,
    Belt4,
    Storage,
}

impl Cell {
    /// Index into the occupancy array for transit cells, `None` for sinks.
    pub fn transit_index(self) -> Option<usize> {
        TRANSIT_CELLS.iter().position(|c| *c == self)
    }

    pub fn is_sink(self) -> bool {
        matches!(self, Cell::Exit | Cell::Storage)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Cell::Entry => "Entry",
            Cell::Belt1 => "Belt1",
            Cell::Table => "Table",
            Cell::Belt2 => "Belt2",
            Cell::Assembly => "Assembly",
            Cell::Belt3 => "Belt3",
            Cell::Exit => "Exit",
            Cell::Belt4 => "Belt4",
            Cell::Storage => "Storage",
        };
        write!(f, "{name}")
    }
}

/// The seven cells that can hold a carriage, in topological order.
pub const TRANSIT_CELLS: [Cell; 7] = [
    Cell::Entry,
    Cell::Belt1,
    Cell::Table,
    Cell::Belt2,
    Cell::Assembly,
    Cell::Belt3,
    Cell::Belt4,
];

/// Rotary table orientation. `TowardAssembly` aligns Belt1-Table-Belt2,
/// `TowardStorage` aligns Table-Belt4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableOrientation {
    TowardAssembly,
    TowardStorage,
}

impl TableOrientation {
    pub fn toggled(self) -> Self {
        match self {
            TableOrientation::TowardAssembly => TableOrientation::TowardStorage,
            TableOrientation::TowardStorage => TableOrientation::TowardAssembly,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            TableOrientation::TowardAssembly => 0,
            TableOrientation::TowardStorage => 1,
        }
    }
}

impl fmt::Display for TableOrientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableOrientation::TowardAssembly => write!(f, "TowardAssembly"),
            TableOrientation::TowardStorage => write!(f, "TowardStorage"),
        }
    }
}

/// Actuator commands, one per method node in the information model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Dispatch,
    Belt1Advance,
    TableRotate,
    Belt2Forward,
    Belt2Backward,
    AssemblyPress,
    Belt3Advance,
    Belt4Advance,
}

/// All actions in declaration order. The RL action space orders them by
/// method node id instead; see the information model.
pub const ALL_ACTIONS: [Action; 8] = [
    Action::Dispatch,
    Action::Belt1Advance,
    Action::TableRotate,
    Action::Belt2Forward,
    Action::Belt2Backward,
    Action::AssemblyPress,
    Action::Belt3Advance,
    Action::Belt4Advance,
];

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Action::Dispatch => "Dispatch",
            Action::Belt1Advance => "Belt1Advance",
            Action::TableRotate => "TableRotate",
            Action::Belt2Forward => "Belt2Forward",
            Action::Belt2Backward => "Belt2Backward",
            Action::AssemblyPress => "AssemblyPress",
            Action::Belt3Advance => "Belt3Advance",
            Action::Belt4Advance => "Belt4Advance",
        };
        write!(f, "{name}")
    }
}

/// One delivered product with where it went and whether the sort was right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub product: Product,
    pub dest: Cell,
    pub correct: bool,
}

/// Everything the plant can report about one applied action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    Dispatched { color: Color },
    Moved { from: Cell, to: Cell },
    Rotated { orientation: TableOrientation },
    RivetInstalled { cell: Cell },
    Collision { blocked_at: Cell },
    InvalidAction { action: Action },
    Delivered { product: Product, dest: Cell, correct: bool },
    Completed { all_correct: bool },
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Dispatched { color } => write!(f, "Dispatched({color})"),
            Event::Moved { from, to } => write!(f, "Moved({from},{to})"),
            Event::Rotated { orientation } => write!(f, "Rotated({orientation})"),
            Event::RivetInstalled { cell } => write!(f, "RivetInstalled({cell})"),
            Event::Collision { blocked_at } => write!(f, "Collision({blocked_at})"),
            Event::InvalidAction { action } => write!(f, "InvalidAction({action})"),
            Event::Delivered { product, dest, correct } => {
                let tag = if *correct { "correct" } else { "incorrect" };
                write!(f, "Delivered({}{},{dest},{tag})", product.color, product.rivets)
            }
            Event::Completed { all_correct } => {
                let tag = if *all_correct { "allCorrect" } else { "notAllCorrect" };
                write!(f, "Completed({tag})")
            }
        }
    }
}

/// Construction parameters for a plant run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoryConfig {
    pub n_products: u32,
    pub seed: u64,
    /// Overrides the color stream when present; length must equal `n_products`.
    pub forced_colors: Option<Vec<Color>>,
    /// Episode cutoff; defaults to 200 steps per product.
    pub max_steps: Option<u64>,
}

impl FactoryConfig {
    pub fn new(n_products: u32, seed: u64) -> Self {
        FactoryConfig { n_products, seed, forced_colors: None, max_steps: None }
    }

    pub fn with_colors(mut self, colors: Vec<Color>) -> Self {
        self.forced_colors = Some(colors);
        self
    }

    pub fn resolved_max_steps(&self) -> u64 {
        self.max_steps.unwrap_or(200 * self.n_products as u64)
    }
}

#[derive(Debug, Error)]
pub enum FactoryError {
    #[error("invalid factory config: {0}")]
    InvalidConfig(String),
    #[error("action applied to a terminal state")]
    Terminal,
}

/// Full plant state. A plain value: cloning it forks the simulation.
#[derive(Debug, Clone)]
pub struct FactoryState {
    config: FactoryConfig,
    max_steps: u64,
    occupancy: [Option<Product>; 7],
    orientation: TableOrientation,
    remaining: u32,
    delivered: Vec<Delivery>,
    step_count: u64,
    color_stream: Splitmix64,
}

/// Integer sensor image of the plant; a pure function of [`FactoryState`].
///
/// Cell codes: 0 empty, `1 + 3*color + rivets` otherwise with Blue = 0 and
/// Green = 1, so 1..=3 are blue with 0..=2 rivets and 4..=6 green.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensorSnapshot {
    /// Codes in [`TRANSIT_CELLS`] order.
    pub cells: [u8; 7],
    pub orientation: u8,
    pub remaining: u32,
    pub delivered_exit: u32,
    pub delivered_storage: u32,
    pub delivered_correct: u32,
}

pub fn product_code(p: Product) -> u8 {
    let color = match p.color {
        Color::Blue => 0,
        Color::Green => 1,
    };
    1 + 3 * color + p.rivets
}

impl SensorSnapshot {
    pub fn cell_code(&self, cell: Cell) -> Option<u8> {
        cell.transit_index().map(|i| self.cells[i])
    }

    /// Canonical state key: the twelve sensor values joined with commas in
    /// lexicographic sensor-node-id order. Injective on snapshots and
    /// byte-stable across runs and platforms.
    pub fn state_index(&self) -> String {
        // Lexicographic order of the sensor node identifiers:
        // Cell.Assembly, Cell.Belt1..Belt4, Cell.Entry, Cell.Table,
        // DeliveredCorrect, DeliveredExit, DeliveredStorage,
        // Orientation, Remaining.
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.cell_code(Cell::Assembly).unwrap(),
            self.cell_code(Cell::Belt1).unwrap(),
            self.cell_code(Cell::Belt2).unwrap(),
            self.cell_code(Cell::Belt3).unwrap(),
            self.cell_code(Cell::Belt4).unwrap(),
            self.cell_code(Cell::Entry).unwrap(),
            self.cell_code(Cell::Table).unwrap(),
            self.delivered_correct,
            self.delivered_exit,
            self.delivered_storage,
            self.orientation,
            self.remaining,
        )
    }
}

/// Where a correctly assembled product of the given color belongs.
pub fn correct_destination(color: Color) -> Cell {
    match color {
        Color::Blue => Cell::Exit,
        Color::Green => Cell::Storage,
    }
}

fn delivery_correct(product: Product, dest: Cell) -> bool {
    product.rivets == 2 && correct_destination(product.color) == dest
}

// One belt link: move whatever sits at `from` into `to`, provided the table
// faces the right way when the transfer touches it.
struct Link {
    from: Cell,
    to: Cell,
    needs: Option<TableOrientation>,
}

impl FactoryState {
    /// Build the initial plant: empty cells, table toward assembly, all
    /// products still waiting at the entry storage.
    pub fn init(config: FactoryConfig) -> Result<Self, FactoryError> {
        if config.n_products == 0 {
            return Err(FactoryError::InvalidConfig(
                "nProducts must be at least 1".into(),
            ));
        }
        if let Some(colors) = &config.forced_colors {
            if colors.len() != config.n_products as usize {
                return Err(FactoryError::InvalidConfig(format!(
                    "forcedColors has {} entries but nProducts is {}",
                    colors.len(),
                    config.n_products
                )));
            }
        }
        let max_steps = config.resolved_max_steps();
        let seed = config.seed;
        Ok(FactoryState {
            remaining: config.n_products,
            config,
            max_steps,
            occupancy: [None; 7],
            orientation: TableOrientation::TowardAssembly,
            delivered: Vec::new(),
            step_count: 0,
            color_stream: Splitmix64::new(seed),
        })
    }

    pub fn config(&self) -> &FactoryConfig {
        &self.config
    }

    pub fn orientation(&self) -> TableOrientation {
        self.orientation
    }

    pub fn remaining(&self) -> u32 {
        self.remaining
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    pub fn delivered(&self) -> &[Delivery] {
        &self.delivered
    }

    pub fn occupant(&self, cell: Cell) -> Option<Product> {
        cell.transit_index().and_then(|i| self.occupancy[i])
    }

    pub fn products_in_transit(&self) -> u32 {
        self.occupancy.iter().filter(|p| p.is_some()).count() as u32
    }

    pub fn dispatched_count(&self) -> u32 {
        self.config.n_products - self.remaining
    }

    /// True once every product is delivered or the step budget is spent.
    pub fn is_done(&self) -> bool {
        self.delivered.len() as u32 == self.config.n_products || self.step_count >= self.max_steps
    }

    /// The color the `index`-th dispatch will produce (0-based), without
    /// consuming the stream. Forced colors take precedence.
    pub fn color_of_dispatch(&self, index: usize) -> Color {
        if let Some(colors) = &self.config.forced_colors {
            return colors[index];
        }
        let mut stream = Splitmix64::new(self.config.seed);
        let mut color = Color::Blue;
        for _ in 0..=index {
            color = if stream.next_u64() & 1 == 0 { Color::Blue } else { Color::Green };
        }
        color
    }

    fn draw_color(&mut self) -> Color {
        let index = self.dispatched_count() as usize;
        let drawn = if self.color_stream.next_u64() & 1 == 0 {
            Color::Blue
        } else {
            Color::Green
        };
        match &self.config.forced_colors {
            Some(colors) => colors[index],
            None => drawn,
        }
    }

    /// Apply one actuator command. Exactly one step passes; the returned
    /// events describe everything that happened, and an action whose only
    /// event is `InvalidAction` left the plant untouched.
    pub fn apply(&mut self, action: Action) -> Result<Vec<Event>, FactoryError> {
        if self.is_done() {
            return Err(FactoryError::Terminal);
        }
        self.step_count += 1;
        let mut events = Vec::new();
        match action {
            Action::Dispatch => {
                if self.occupant(Cell::Entry).is_none() && self.remaining > 0 {
                    let color = self.draw_color();
                    self.occupancy[Cell::Entry.transit_index().unwrap()] =
                        Some(Product { color, rivets: 0 });
                    self.remaining -= 1;
                    events.push(Event::Dispatched { color });
                } else {
                    events.push(Event::InvalidAction { action });
                }
            }
            Action::TableRotate => {
                self.orientation = self.orientation.toggled();
                events.push(Event::Rotated { orientation: self.orientation });
            }
            Action::AssemblyPress => match self.occupant(Cell::Assembly) {
                Some(p) if p.rivets < 2 => {
                    let idx = Cell::Assembly.transit_index().unwrap();
                    self.occupancy[idx] = Some(Product { rivets: p.rivets + 1, ..p });
                    events.push(Event::RivetInstalled { cell: Cell::Assembly });
                }
                _ => events.push(Event::InvalidAction { action }),
            },
            Action::Belt1Advance => self.advance(
                action,
                &[
                    Link {
                        from: Cell::Belt1,
                        to: Cell::Table,
                        needs: Some(TableOrientation::TowardAssembly),
                    },
                    Link { from: Cell::Entry, to: Cell::Belt1, needs: None },
                ],
                &mut events,
            ),
            Action::Belt2Forward => self.advance(
                action,
                &[
                    Link { from: Cell::Belt2, to: Cell::Assembly, needs: None },
                    Link {
                        from: Cell::Table,
                        to: Cell::Belt2,
                        needs: Some(TableOrientation::TowardAssembly),
                    },
                ],
                &mut events,
            ),
            Action::Belt2Backward => self.advance(
                action,
                &[
                    Link {
                        from: Cell::Belt2,
                        to: Cell::Table,
                        needs: Some(TableOrientation::TowardAssembly),
                    },
                    Link { from: Cell::Assembly, to: Cell::Belt2, needs: None },
                ],
                &mut events,
            ),
            Action::Belt3Advance => self.advance(
                action,
                &[
                    Link { from: Cell::Belt3, to: Cell::Exit, needs: None },
                    Link { from: Cell::Assembly, to: Cell::Belt3, needs: None },
                ],
                &mut events,
            ),
            Action::Belt4Advance => self.advance(
                action,
                &[
                    Link { from: Cell::Belt4, to: Cell::Storage, needs: None },
                    Link {
                        from: Cell::Table,
                        to: Cell::Belt4,
                        needs: Some(TableOrientation::TowardStorage),
                    },
                ],
                &mut events,
            ),
        }
        Ok(events)
    }

    // Process a belt chain head-first. A unit blocked by occupancy or by a
    // misaligned table emits a collision against the cell it tried to enter;
    // a chain with nothing to move is an invalid action.
    fn advance(&mut self, action: Action, links: &[Link], events: &mut Vec<Event>) {
        let mut attempted = false;
        for link in links {
            let Some(product) = self.occupant(link.from) else { continue };
            attempted = true;
            if let Some(needed) = link.needs {
                if self.orientation != needed {
                    events.push(Event::Collision { blocked_at: link.to });
                    continue;
                }
            }
            if link.to.is_sink() {
                self.occupancy[link.from.transit_index().unwrap()] = None;
                let correct = delivery_correct(product, link.to);
                self.delivered.push(Delivery { product, dest: link.to, correct });
                events.push(Event::Delivered { product, dest: link.to, correct });
                if self.delivered.len() as u32 == self.config.n_products {
                    let all_correct = self.delivered.iter().all(|d| d.correct);
                    events.push(Event::Completed { all_correct });
                }
            } else if self.occupant(link.to).is_some() {
                events.push(Event::Collision { blocked_at: link.to });
            } else {
                self.occupancy[link.from.transit_index().unwrap()] = None;
                self.occupancy[link.to.transit_index().unwrap()] = Some(product);
                events.push(Event::Moved { from: link.from, to: link.to });
            }
        }
        if !attempted {
            events.push(Event::InvalidAction { action });
        }
    }

    /// Integer sensor image of the current state.
    pub fn snapshot(&self) -> SensorSnapshot {
        let mut cells = [0u8; 7];
        for (i, slot) in self.occupancy.iter().enumerate() {
            if let Some(p) = slot {
                cells[i] = product_code(*p);
            }
        }
        SensorSnapshot {
            cells,
            orientation: self.orientation.code(),
            remaining: self.remaining,
            delivered_exit: self.delivered.iter().filter(|d| d.dest == Cell::Exit).count() as u32,
            delivered_storage: self
                .delivered
                .iter()
                .filter(|d| d.dest == Cell::Storage)
                .count() as u32,
            delivered_correct: self.delivered.iter().filter(|d| d.correct).count() as u32,
        }
    }

    /// Product conservation: everything dispatched is either in transit or
    /// delivered. Used by tests after every transition.
    pub fn conservation_holds(&self) -> bool {
        self.dispatched_count() == self.products_in_transit() + self.delivered.len() as u32
    }
}
