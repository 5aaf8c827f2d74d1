fn main() {
    std::process::exit(lucas_rank::cli::run(std::env::args_os()));
}
