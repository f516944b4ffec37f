use std::io;

fn main() {
    let code = deepca::harness::cli_main(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
