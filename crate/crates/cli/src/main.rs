fn main() {
    std::process::exit(rdich_cli::run(std::env::args_os()));
}
