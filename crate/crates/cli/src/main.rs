fn main() {
    std::process::exit(placescope_cli::run(std::env::args_os()));
}
