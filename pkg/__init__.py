# hamop package initialization
