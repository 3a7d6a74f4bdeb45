//! Prints the distortion catalogue.

use qalign_core::degradations::list_kinds;

pub fn run() {
    for info in list_kinds() {
        println!("{:<20} {:<28} {}", info.group.name(), info.kind.name(), info.description);
    }
}
