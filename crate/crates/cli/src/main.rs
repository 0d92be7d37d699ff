fn main() {
    std::process::exit(necorpia_cli::run(std::env::args_os()));
}
