def calculate(expression):
    result = eval(expression)
    return result
