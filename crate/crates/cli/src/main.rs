fn main() {
    std::process::exit(gridlock_cli::run(std::env::args_os()));
}
