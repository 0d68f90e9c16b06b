fn main() {
    std::process::exit(netcontest_cli::run(std::env::args_os()));
}
