fn main() {
    std::process::exit(articulated_parking::cli::cli_main(std::env::args_os()));
}
