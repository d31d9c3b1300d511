from theta_wiener_hopf.main import main

if __name__ == "__main__":
    main()
