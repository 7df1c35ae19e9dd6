//! A fuel-driven counter machine whose queries depend on earlier calls.

#[derive(Debug, Default)]
pub struct Machine {
    fuel: u32,
    position: u32,
}

impl Machine {
    pub fn new() -> Machine {
        Machine::default()
    }

    /// Adds fuel and returns the new fuel level.
    pub fn feed(&mut self, amount: u32) -> u32 {
        self.fuel = self.fuel.saturating_add(amount);
        self.fuel
    }

    /// Burns one unit of fuel to move one step; returns the position.
    pub fn advance(&mut self) -> u32 {
        if self.fuel > 0 {
            self.fuel -= 1;
            self.position += 1;
        }
        self.position
    }

    pub fn position(&self) -> u32 {
        self.position
    }
}
