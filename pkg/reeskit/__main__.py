from reeskit.main import main

main()
