fn main() {
    std::process::exit(ctnoise::cli::run(std::env::args_os()));
}
