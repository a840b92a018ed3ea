fn main() -> std::process::ExitCode {
    injection_ising::cli::main()
}
