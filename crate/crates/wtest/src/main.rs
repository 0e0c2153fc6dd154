fn main() {
    std::process::exit(wtest::cli::run(std::env::args_os()));
}
