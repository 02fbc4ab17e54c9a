fn main() {
    std::process::exit(mixfactor::cli::run(std::env::args_os()));
}
