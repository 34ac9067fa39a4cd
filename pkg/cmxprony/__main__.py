import sys

if __name__ == "__main__":
    # Check if the user is using the correct version of Python
    python_version = sys.version.split()[0]

    if sys.version_info < (3, 10):
        print(f"cmxprony requires Python 3.10+\nYou are using Python {python_version}, which is not supported by cmxprony.")
        sys.exit(1)

    from cmxprony import cmxprony
    cmxprony.main()
