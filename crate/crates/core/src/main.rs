fn main() {
    std::process::exit(flower_auction::cli::run(std::env::args_os()));
}
