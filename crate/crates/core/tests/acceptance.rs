use std::process::ExitCode;
use std::time::Instant;

use isosceles::verify;

fn main() -> ExitCode {
    let mut failed = 0;
    for id in 1..=14 {
        let t = Instant::now();
        let c = verify::run(id);
        let mark = if c.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {mark}  {} ({:.1} s): {}", c.id, c.title, t.elapsed().as_secs_f64(), c.detail);
        if !c.pass {
            failed += 1;
        }
    }
    println!("{} of 14 criteria pass", 14 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
