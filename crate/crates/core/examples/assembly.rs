//! Parses a labelled program, prints it back, and shows a diagnostic.

use abacus_rnn::asm::{parse_program, print_program};

const SOURCE: &str = "#kind: abacus
# R0 := R0 + R1
loop: dec 1 done
      inc 0 loop
      dec 2 loop
done: halt
";

fn main() {
    let p = parse_program(SOURCE).unwrap();
    print!("{}", print_program(&p));
    match parse_program("#kind: abacus\nadd 1 2 3 0\n") {
        Ok(_) => println!("unexpectedly parsed"),
        Err(diags) => diags.iter().for_each(|d| println!("error: {d}")),
    }
}
