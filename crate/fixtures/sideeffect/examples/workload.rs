//! Replays a recorded refuelling schedule.

use sideeffect::Machine;

fn main() {
    let mut moved = 0;
    for amount in [1, 2, 3, 5, 8, 0] {
        let mut m = Machine::new();
        m.feed(amount);
        moved += m.advance();
    }
    println!("moved {moved} steps");
}
